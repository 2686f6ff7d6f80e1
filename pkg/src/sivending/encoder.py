"""Rate-distortion-cost results when the encoder chooses the actions.

The action now also carries information to the decoder through ``Y``, so the
rate credits ``I(Y;A)``. The near-lossless and Markov cases are exact; in
general the rate is bracketed by :func:`encoder_bounds`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sivending import functionals as fl
from sivending.classic import RD_CONFIG, ChannelSpec, capacity_with_cost, rd_bracket, rd_function, wz_model
from sivending.decoder import InfeasibleError, _require
from sivending.problem import GaussianSpec, ProblemSpec
from sivending.simplex import SLACK, Envelope, SolverConfig


@dataclass(frozen=True)
class BoundsReport:
    """Bracket on the encoder-action rate (bits).

    ``upper_open_switch`` reconstructs from ``(U, A, Y)`` with ``U`` ranging
    over ``aux_size`` labels; ``upper_closed_switch`` lets the encoder pick the
    reproduction kernel directly. ``certified_exact`` marks instances where the
    lower bound is known to be the rate.
    """

    lower: float
    upper_open_switch: float
    upper_closed_switch: float
    certified_exact: bool
    aux_size: int = 0


def _lossless_env(spec: ProblemSpec, cfg):
    return Envelope(fl.EncoderLossless(spec.source_model), cfg)


def _lossless_value(env: Envelope, c: float) -> float:
    """Unclipped ``min H(X) - I(Y;A,X)`` at cost ``c``."""
    if c < env.c_min - 1e-12:
        raise InfeasibleError(f"cost {c} below the cheapest action ({env.c_min})")
    return env.minimize(0.0, c).rate


def encoder_lossless_rate(spec: ProblemSpec, c: float, cfg: SolverConfig | None = None) -> float:
    """``min H(X) - I(Y;A,X)`` over ``P_{A|X}`` with ``E cost <= c``, clipped at zero."""
    _require(spec, "encoder-lossless", "encoder-bounds", "encoder-markov")
    return max(_lossless_value(_lossless_env(spec, cfg or SolverConfig()), c), 0.0)


def gaussian_rdc(g: GaussianSpec) -> float:
    """Closed form for ``Y = X + A + N`` under squared error and power cost.

    Zero on and beyond the boundary ``gain * d = var_x * var_n`` (with a
    relative slack of ``1e-12`` so that boundary points computed in floating
    point land in the zero region).
    """
    gain = (1.0 + np.sqrt(g.c / g.var_x)) ** 2 * g.var_x + g.var_n
    if gain * g.d >= g.var_x * g.var_n * (1.0 - 1e-12):
        return 0.0
    return 0.5 * float(np.log2(g.var_n / gain * g.var_x / g.d))


def _markov_channel(spec: ProblemSpec) -> ChannelSpec:
    if not spec.is_markov():
        raise ValueError("P_{Y|X,A} depends on x; the Markov decomposition does not apply")
    return ChannelSpec(spec.w[0], spec.lam)


def markov_rdc(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> float:
    """``max(R(d) - Cap(c), 0)`` when ``Y`` depends on ``X`` only through ``A``."""
    channel = _markov_channel(spec)
    rd = rd_function(spec.px, spec.rho, d)
    if not np.isfinite(rd):
        raise InfeasibleError(f"distortion {d} below the least achievable")
    return max(rd - capacity_with_cost(channel, c, cfg), 0.0)


def _rd_kernel(spec: ProblemSpec, d: float, cfg):
    """Reproduction kernel ``P(xh|x)`` meeting ``d`` with rate at most ``R(d)``."""
    model = wz_model(spec.px, np.ones((spec.n_x, 1)), spec.rho)
    fn = fl.LabelDecoder(model)
    env = Envelope(fn, cfg)
    env.minimize(d, 0.0)
    q = env.kernel_at(d, 0.0)
    out = np.zeros((spec.n_x, spec.n_xhat))
    out[:, fn.labels.rule[:, 0]] = q
    return out


def _constant_labels(labels: fl.Labels, model):
    """Index of the label ``(a, rule = xh everywhere reachable)``; ``-1`` if absent."""
    live = model.ps > 0
    idx = np.full((model.n_actions, model.n_xhat), -1)
    for a in range(model.n_actions):
        ys = np.flatnonzero(model.w[live, a, :].max(axis=0) > 0)
        for l in np.flatnonzero(labels.action == a):
            r = labels.rule[l, ys]
            if np.all(r == r[0]):
                idx[a, r[0]] = l
    return idx


def _label_seed(fn: fl.EncoderOpen, pa, pxh):
    idx = _constant_labels(fn.labels, fn.model)
    q = np.zeros(fn.shape)
    for a in range(idx.shape[0]):
        for h in range(idx.shape[1]):
            q[:, idx[a, h]] += pa[:, a] * pxh[:, h]
    return q / q.sum(axis=1, keepdims=True)


def _is_lossless(spec: ProblemSpec, d: float) -> bool:
    rho = spec.rho.values
    if rho.shape[0] != rho.shape[1] or d > 1e-12:
        return False
    off = ~np.eye(rho.shape[0], dtype=bool)
    return bool(np.all(np.diag(rho) == 0) and np.all(rho[off] > 0))


def encoder_bounds(spec: ProblemSpec, d: float, c: float, cfg: SolverConfig | None = None) -> BoundsReport:
    """Lower bound and two achievable rates for encoder actions at ``(d, c)``.

    * lower: ``max(R(d) - max I(Y;X,A), 0)``, optimising the two terms apart;
    * open switch: ``min I(X;A) + I(X;U|A,Y) - I(Y;A)``;
    * closed switch: ``min I(X;A) + I(Xh;X|A,Y) - I(Y;A)``.

    Both achievable problems are non-convex. They start from structured
    policies (the lossless-optimal and action-blind action laws, each paired
    with the rate-distortion test channel or the best per-symbol estimate),
    then refine by multi-start descent inside the time-sharing envelope. Every
    open-switch point is also a closed-switch point, so the closed value never
    exceeds the open one.
    """
    _require(spec, "encoder-bounds", "encoder-markov", "encoder-lossless")
    cfg = cfg or SolverConfig()
    model = spec.source_model
    rho = spec.rho.values
    d_min = float(spec.px.mass @ rho.min(axis=1))
    if d < d_min - 1e-12:
        raise InfeasibleError(f"distortion {d} below the least achievable ({d_min})")
    lossless_env = _lossless_env(spec, cfg)
    if c < lossless_env.c_min - 1e-12:
        raise InfeasibleError(f"cost {c} below the cheapest action ({lossless_env.c_min})")
    # certified (dual) sides of both terms keep the lower bound valid; they are
    # taken at the same slack the envelopes allow on the achievable side
    f_lossless = Envelope(fl.EncoderLossless(model), RD_CONFIG).minimize(0.0, c + SLACK).lower
    rd = rd_bracket(spec.px, rho, d + SLACK)[0]
    lower = max(rd - fl._h(spec.px.mass) + f_lossless, 0.0)
    lossless_env.minimize(0.0, c)

    open_fn = fl.EncoderOpen(model)
    open_env = Envelope(open_fn, cfg)
    pa_best = lossless_env.kernel_at(0.0, c)
    pa_blind = np.broadcast_to(spec.px.mass @ pa_best, pa_best.shape)
    best = np.zeros_like(rho)
    best[np.arange(rho.shape[0]), rho.argmin(axis=1)] = 1.0
    for pa in (pa_best, pa_blind):
        for pxh in (_rd_kernel(spec, d, cfg), best):
            open_env._add(_label_seed(open_fn, pa, pxh), (False, False))
    upper_open = open_env.minimize(d, c, floor=lower).rate

    closed_fn = fl.EncoderClosed(model, rho)
    closed_env = Envelope(closed_fn, cfg)
    for q in open_env.states:
        if q is not None:
            closed_env._add(closed_fn.from_labels(open_fn.labels, q), (False, False))
    upper_closed = closed_env.minimize(d, c, floor=lower).rate

    exact = _is_lossless(spec, d) or spec.is_markov()
    return BoundsReport(lower, max(upper_open, 0.0), max(upper_closed, 0.0), exact, len(open_fn.labels))
