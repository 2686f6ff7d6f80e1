"""Classical reference quantities: RD function, costly capacity, Slepian-Wolf, Wyner-Ziv."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sivending import functionals as fl
from sivending.info import (
    CostVector,
    DistortionMatrix,
    JointDist,
    ProbVector,
    StochasticKernel,
    bernoulli_rd,
    conditional_entropy,
)
from sivending.problem import SourceModel
from sivending.simplex import Envelope, SolverConfig, functional_for_model

RD_CONFIG = SolverConfig(objective_tol=1e-12, envelope_tol=1e-9)


@dataclass(frozen=True)
class ChannelSpec:
    """Channel ``P_{Y|A}`` with per-input cost."""

    kernel: StochasticKernel
    cost: CostVector

    def __post_init__(self):
        if not isinstance(self.kernel, StochasticKernel):
            object.__setattr__(self, "kernel", StochasticKernel(self.kernel))
        if not isinstance(self.cost, CostVector):
            object.__setattr__(self, "cost", CostVector(self.cost))
        if self.kernel.input_size != self.cost.values.size:
            raise ValueError(f"{self.kernel.input_size} channel inputs but {self.cost.values.size} costs")


def _as(kind, value):
    return value if isinstance(value, kind) else kind(value)


def wz_model(px, p_y_given_x, rho) -> SourceModel:
    """Single-action source model for lossy coding with decoder side information."""
    px = _as(ProbVector, px).mass
    w = np.asarray(_as(StochasticKernel, p_y_given_x).rows)[:, None, :]
    rho = _as(DistortionMatrix, rho).values
    if rho.shape[0] != px.size or w.shape[0] != px.size:
        raise ValueError("source, side-information kernel and distortion disagree on |X|")
    return SourceModel(px, w, w[:, :, :, None] * rho[:, None, None, :], np.zeros(1))


def _max_useful_distortion(px, rho) -> float:
    return float(np.min(px @ rho))


def rd_function(px, rho, d: float, cfg: SolverConfig | None = None) -> float:
    """``R(D)`` in bits by Blahut-Arimoto on reproduction kernels, exact at the envelope.

    Returns ``inf`` below the least achievable distortion.
    """
    if d < 0:
        raise ValueError("distortion must be nonnegative")
    return rd_bracket(px, rho, d, cfg)[1]


def rd_bracket(px, rho, d: float, cfg: SolverConfig | None = None) -> tuple[float, float]:
    """``(lower, upper)`` on ``R(D)``: Lagrangian dual bound and achieved rate."""
    px = _as(ProbVector, px)
    rho = _as(DistortionMatrix, rho)
    if d >= _max_useful_distortion(px.mass, rho.values) - 1e-15:
        return 0.0, 0.0
    model = wz_model(px, np.ones((px.alphabet_size, 1)), rho)
    env = Envelope(fl.LabelDecoder(model), cfg or RD_CONFIG)
    res = env.minimize(d, 0.0)
    if not res.feasible:
        return np.inf, np.inf
    return max(res.lower, 0.0), max(res.rate, 0.0)


def capacity_with_cost(ch: ChannelSpec, c: float, cfg: SolverConfig | None = None) -> float:
    """``max I(A;Y)`` over input laws with ``E cost(A) <= c`` (Blahut-Arimoto, envelope in ``c``)."""
    cost = ch.cost.values
    if c < cost.min() - 1e-12:
        raise ValueError(f"cost {c} below the cheapest input ({cost.min()})")
    w = ch.kernel.rows[None, :, :]
    model = SourceModel(np.ones(1), w, np.zeros(w.shape + (1,)), cost)
    env = Envelope(fl.EncoderLossless(model), cfg or RD_CONFIG)
    res = env.minimize(0.0, c)
    return max(-res.rate, 0.0)


def slepian_wolf_rate(px, p_y_given_x) -> float:
    """``H(X|Y)`` in bits."""
    px = _as(ProbVector, px)
    k = _as(StochasticKernel, p_y_given_x)
    if k.input_size != px.alphabet_size:
        raise ValueError("kernel rows must match the source alphabet")
    joint = JointDist(px.mass[:, None] * k.rows, ("X", "Y"))
    return conditional_entropy(joint, "X", "Y")


def _split(pxy: JointDist):
    t = pxy.marginal(["X", "Y"])
    px = t.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(px[:, None] > 0, t / px[:, None], 1.0 / t.shape[1])
    return px, k


def wyner_ziv_rate(pxy: JointDist, rho, d: float, cfg: SolverConfig | None = None,
                   parameterization: str = "labels", n_aux: int | None = None) -> float:
    """Wyner-Ziv function ``min I(X;U|Y)`` at distortion ``d``.

    The default label form indexes ``U`` by decoding rules and is solved to
    global optimality; ``parameterization="joint"`` optimises a free
    ``P_{U|X}`` with ``|U| = |X| + 1`` (or ``n_aux``) instead.
    """
    if d < 0:
        raise ValueError("distortion must be nonnegative")
    px, k = _split(pxy)
    model = wz_model(px, k, rho)
    cfg = cfg or RD_CONFIG
    if parameterization == "joint":
        fn = functional_for_model("decoder", model, "joint", n_aux or px.size + 1)
    else:
        fn = fl.LabelDecoder(model)
    env = Envelope(fn, cfg)
    res = env.minimize(d, 0.0)
    return max(res.rate, 0.0) if res.feasible else np.inf


def erased_si_wz(p: float, e: float, d: float) -> float:
    """``e * R_b(p, d / e)``: Wyner-Ziv rate when the side information is an erased copy."""
    for name, v in (("p", p), ("e", e), ("d", d)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} = {v!r} outside [0, 1]")
    if e == 0.0:
        return 0.0
    return e * bernoulli_rd(p, min(d / e, 1.0))
