"""Curve data for the standard examples (data only, no plotting).

Each function returns ``(columns, rows)`` with rows as tuples of floats.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from sivending import functionals as fl
from sivending.decoder import greedy_rate, lossless_rate_decoder
from sivending.encoder import gaussian_rdc
from sivending.info import bernoulli_rd, binary_entropy
from sivending.problem import GaussianSpec, ProblemSpec
from sivending.simplex import SolverConfig, sweep_functional

FIG3_DELTAS = tuple(np.round(np.arange(1, 50) * 0.02, 10))
FIG4_COSTS = tuple(np.linspace(0.0, 0.5, 41))
FIG5_COSTS = tuple(np.linspace(0.0, 1.0, 41))
FIG7_COSTS = (0.0, 0.3, 0.6, 1.0)
FIG7_DISTORTIONS = tuple(np.round(np.arange(1, 51) * 0.01, 10))


def zs_instance(delta: float, mode: str = "decoder") -> ProblemSpec:
    """Binary source, two actions: action 0 sees X through a Z channel, action 1 through an S channel."""
    w = np.zeros((2, 2, 2))
    w[0, 0] = [1.0, 0.0]
    w[1, 0] = [delta, 1.0 - delta]
    w[1, 1] = [0.0, 1.0]
    w[0, 1] = [1.0 - delta, delta]
    return ProblemSpec([0.5, 0.5], w.reshape(4, 2), 1.0 - np.eye(2), [0.0, 1.0], mode)


def fig3(deltas=FIG3_DELTAS, cfg: SolverConfig | None = None):
    """Gap between the greedy and the optimal lossless rate on the Z/S instance."""
    rows = []
    for delta in deltas:
        spec = zs_instance(float(delta))
        best = lossless_rate_decoder(spec, 1.0, cfg)
        greedy = greedy_rate(spec, 0.0, cfg)
        rows.append((float(delta), greedy - best, best, greedy))
    return ("delta", "gap", "r_min", "r_greedy"), rows


def fig4(costs=FIG4_COSTS, delta: float = 0.5, cfg: SolverConfig | None = None):
    """Lossless rate against the cost budget on the Z/S instance, with the time-sharing chord."""
    spec = zs_instance(delta)
    curve = sweep_functional(fl.LosslessDecoder(spec.source_model), [0.0], sorted(costs),
                             cfg or SolverConfig())
    lo, hi = curve.rate_at(0.0, 0.0), curve.rate_at(0.0, 0.5)
    rows = []
    for c in costs:
        t = min(2.0 * c, 1.0)
        rows.append((float(c), curve.rate_at(0.0, float(c)), t * hi + (1.0 - t) * lo))
    return ("c", "r_min", "timeshare"), rows


def _erasure_rate(beta, d1, d, c, e):
    """Rate of the observe-or-not policy with ``beta = 2 P(X=1, A=0)`` and distortion ``d1`` on observed symbols."""
    p0 = beta / (2.0 * (1.0 - c))
    p1 = (1.0 - beta) / (2.0 * c)
    d0 = (d - c * d1) / (1.0 - c)
    cond = binary_entropy(p0) * (1.0 - c) + binary_entropy(p1) * c
    return (1.0 - cond + bernoulli_rd(p0, min(max(d0, 0.0), 1.0)) * (1.0 - c)
            + e * bernoulli_rd(p1, min(d1 / e, 1.0)) * c)


def _erasure_grid(d, c, e, n=201):
    lo_b, hi_b = max(0.0, 1.0 - 2.0 * c), min(1.0, 2.0 - 2.0 * c)
    hi_d = min(d / c, e)
    b = np.linspace(lo_b, hi_b, n)[:, None]
    d1 = np.linspace(0.0, hi_d, n)[None, :]
    p0 = b / (2.0 * (1.0 - c))
    p1 = (1.0 - b) / (2.0 * c)
    d0 = np.clip((d - c * d1) / (1.0 - c), 0.0, 1.0)

    def hb(p):
        p = np.clip(p, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
        return np.nan_to_num(t)

    def rb(p, x):
        return np.where(x >= np.minimum(p, 1 - p), 0.0, np.maximum(hb(p) - hb(x), 0.0))

    vals = (1.0 - hb(p0) * (1 - c) - hb(p1) * c + rb(p0, d0) * (1 - c)
            + e * rb(p1, np.minimum(d1 / e, 1.0)) * c)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    return float(vals[i, j]), (float(b[i, 0]), float(d1[0, j])), ((lo_b, hi_b), (0.0, hi_d))


def erasure_rate(d: float, c: float, e: float) -> float:
    """Least rate when the decoder may observe an erased copy of a fair bit on a fraction ``c`` of symbols.

    Minimises over the action bias and the distortion split: a grid search
    followed by a bounded local polish.
    """
    if c <= 0.0:
        return bernoulli_rd(0.5, d)
    if c >= 1.0:
        return e * bernoulli_rd(0.5, min(d / e, 1.0))
    value, x0, bounds = _erasure_grid(d, c, e)
    res = minimize(lambda x: _erasure_rate(x[0], x[1], d, c, e), x0, method="Nelder-Mead",
                   bounds=bounds, options=dict(xatol=1e-12, fatol=1e-14, maxiter=4000))
    return float(min(value, res.fun))


def fig5(costs=FIG5_COSTS, d: float = 0.25, e: float = 0.5):
    """Erasure observe-or-not curve with the chord between its endpoints."""
    lo, hi = erasure_rate(d, 0.0, e), erasure_rate(d, 1.0, e)
    rows = [(float(c), erasure_rate(d, float(c), e), float((1.0 - c) * lo + c * hi)) for c in costs]
    return ("c", "rate", "chord"), rows


def fig7(distortions=FIG7_DISTORTIONS, costs=FIG7_COSTS, var_x: float = 1.0, var_n: float = 1.0):
    """Gaussian encoder-action rate against distortion, one column per cost."""
    rows = [(float(d), *(gaussian_rdc(GaussianSpec(var_x, var_n, float(d), float(c))) for c in costs))
            for d in distortions]
    return ("d", *(f"c={c:g}" for c in costs)), rows


FIGURES = {"fig3": fig3, "fig4": fig4, "fig5": fig5, "fig7": fig7}
