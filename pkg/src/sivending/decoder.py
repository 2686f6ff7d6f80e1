"""Rate-distortion-cost functions when the decoder chooses the actions.

All solvers return bits and raise :class:`InfeasibleError` when the
distortion or cost target cannot be met by any policy. "Unconstrained cost"
means ``c = max(cost)``.
"""

from __future__ import annotations

import numpy as np

from sivending import functionals as fl
from sivending.classic import slepian_wolf_rate, wyner_ziv_rate, wz_model
from sivending.info import JointDist
from sivending.problem import ProblemSpec
from sivending.simplex import Envelope, SolverConfig, Vertex, mix


class InfeasibleError(ValueError):
    """The requested (distortion, cost) pair lies outside the achievable region."""


def _require(spec: ProblemSpec, *modes):
    if spec.mode not in modes:
        raise ValueError(f"expected a ProblemSpec in mode {' or '.join(modes)}, got {spec.mode!r}")


def _solve(fn, d, c, cfg):
    res = Envelope(fn, cfg or SolverConfig()).minimize(d, c)
    if not res.feasible:
        raise InfeasibleError(f"(d={d}, c={c}) is not achievable")
    return max(res.rate, 0.0)


def rdc_decoder(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> float:
    """``min I(X;A) + I(X;U|Y,A)`` subject to ``E rho <= d`` and ``E cost <= c``."""
    _require(spec, "decoder")
    return _solve(fl.LabelDecoder(spec.source_model), d, c, cfg)


def lossless_rate_decoder(spec: ProblemSpec, c: float, cfg: SolverConfig | None = None) -> float:
    """``min I(X;A) + H(X|Y,A)`` over ``P_{A|X}`` with ``E cost <= c``."""
    _require(spec, "decoder")
    return _solve(fl.LosslessDecoder(spec.source_model), 0.0, c, cfg)


def _action_slice(spec: ProblemSpec, a: int):
    w = spec.w[:, a, :]
    return JointDist(spec.px.mass[:, None] * w, ("X", "Y")), w


def greedy_rate(spec: ProblemSpec, d: float, cfg: SolverConfig | None = None) -> float:
    """Best single fixed action: ``min_a R_WZ`` (``min_a H(X|Y)`` at ``d = 0``)."""
    rates = []
    for a in range(spec.n_actions):
        pxy, w = _action_slice(spec, a)
        if d == 0.0:
            rates.append(slepian_wolf_rate(spec.px, w))
        else:
            rates.append(wyner_ziv_rate(pxy, spec.rho, d, cfg))
    return float(min(rates))


def timeshare_bound(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> float:
    """Best time sharing of per-action Wyner-Ziv codes.

    Each action's Wyner-Ziv curve is traced separately; a linear programme
    picks the action fractions and distortion split, and its duals steer new
    Wyner-Ziv solves until the bound is tight.
    """
    _require(spec, "decoder", "decoder-independent")
    cfg = cfg or SolverConfig()
    cost = spec.lam
    envs = []
    for a in range(spec.n_actions):
        model = wz_model(spec.px, spec.w[:, a, :], spec.rho)
        envs.append(Envelope(fl.LabelDecoder(model), cfg))
    d_min = min(e.d_min for e in envs)
    c_min, c_max = float(cost.min()), float(cost.max())
    if c < c_min - 1e-12:
        raise InfeasibleError(f"cost {c} below the cheapest action")
    if _mixed_dmin(envs, cost, c) > d + 1e-12:
        raise InfeasibleError(f"distortion {d} below the least achievable at cost {c}")
    pinned = d <= d_min + 1e-12

    def inner(a, lam_d, warm):
        env = envs[a]
        if pinned:
            return env.solve(0.0, 0.0, mask_d=True, warm=warm)
        return env.solve(lam_d, 0.0, warm=warm)

    verts, tags, states = [], [], []

    def add(a, state):
        r, dist, _ = envs[a].fn.measure(state)
        verts.append(Vertex(r, dist, float(cost[a])))
        tags.append(a)
        states.append(state)
        return verts[-1]

    for a in range(spec.n_actions):
        add(a, inner(a, 1.0, None))
        if not pinned:
            _, q = envs[a].min_distortion(0.0)
            add(a, q)
    use_c = c < c_max - 1e-12
    lower, upper = -np.inf, np.inf
    for _ in range(cfg.envelope_rounds):
        out = mix(verts, d, c, True, use_c)
        if out is None:
            raise InfeasibleError(f"(d={d}, c={c}) is not achievable by time sharing")
        upper, theta, lam_d, lam_c = out
        lam_d = min(lam_d, Envelope.LAMBDA_CAP)
        bound = np.inf
        new = False
        for a in range(spec.n_actions):
            warm = max((i for i in range(len(tags)) if tags[i] == a), key=lambda i: theta[i])
            v = add(a, inner(a, lam_d, states[warm]))
            bound = min(bound, v.rate + lam_d * (v.distortion - d) + lam_c * (v.cost - c) * use_c)
            new |= all(abs(v.rate - u.rate) + abs(v.distortion - u.distortion) > 1e-12
                       for u in verts[:-1])
        lower = max(lower, bound)
        if upper - lower <= cfg.envelope_tol or not new:
            break
    return max(upper, 0.0)


def _mixed_dmin(envs, cost, c):
    """Least distortion reachable by mixing actions' best estimators within cost ``c``."""
    pts = [Vertex(e.d_min, 0.0, float(cost[a])) for a, e in enumerate(envs)]
    out = mix(pts, 0.0, c, False, True)
    return np.inf if out is None else out[0]


def rdc_independent(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> float:
    """``min I(X;U|Y,A)`` with ``A`` independent of ``X`` (actions before the index)."""
    _require(spec, "decoder-independent", "decoder")
    return _solve(fl.IndependentActions(spec.source_model), d, c, cfg)


def rdc_causal(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None,
               parameterization: str = "labels") -> float:
    """``min I(X;U,A)``: reconstruction may only use the current side-information symbol."""
    _require(spec, "causal")
    model = spec.source_model
    if parameterization == "joint":
        fn = fl.JointDecoder(model, model.n_s * model.n_actions + 2, causal=True)
    else:
        fn = fl.LabelDecoder(model, causal=True)
    return _solve(fn, d, c, cfg)


def rdc_indirect(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> float:
    """``min I(Z;A) + I(Z;U|Y,A)`` when the encoder only sees ``Z``; distortion is measured on ``X``."""
    _require(spec, "indirect")
    return _solve(fl.LabelDecoder(spec.source_model), d, c, cfg)
