"""Exhaustive grid search over kernels, kept independent of the iterative solvers.

Every row of ``P_{A,U|S}`` (or ``P_{A|S}``) ranges over the uniform simplex
grid ``{k / r}``; the product over rows is enumerated in chunks and scored by
entropies of the full joint tensor. The decoder is the cell-wise argmin over
reproductions, which equals the minimum over all decoder tables because the
distortion separates across ``(u, y)`` cells. A shrinking pattern search
from several well-separated grid minimisers sharpens the answer.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from sivending.info import StochasticKernel
from sivending.problem import ProblemSpec
from sivending.simplex import LagrangeWeights, PolicyPoint, SolverConfig, _ALIASES

ORACLE_OBJECTIVES = ("decoder", "causal", "indirect", "lossless", "encoder-lossless")
CHUNK = 16384


def simplex_grid(m: int, r: int) -> np.ndarray:
    """All points of the ``m``-simplex with coordinates in ``{0, 1/r, ..., 1}``."""
    bars = np.array(list(combinations(range(r + m - 1), m - 1)), dtype=int).reshape(-1, m - 1)
    n = bars.shape[0]
    edges = np.hstack([np.full((n, 1), -1), bars, np.full((n, 1), r + m - 1)])
    return (np.diff(edges, axis=1) - 1).astype(float) / r


def _h(p, keep):
    """Entropy (bits) of the marginal of batched joints ``p`` on axes ``keep`` (batch axis 0 kept)."""
    drop = tuple(i for i in range(1, p.ndim) if i not in keep)
    m = p.sum(axis=drop) if drop else p
    m = m.reshape(m.shape[0], -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(m > 1e-300, m * np.log2(m), 0.0)
    return -t.sum(axis=1)


class _Scorer:
    def __init__(self, objective, spec: ProblemSpec, n_aux: int):
        model = spec.source_model
        self.objective = objective
        self.ps, self.w, self.wd, self.cost = model.ps, model.w, model.wd, model.cost
        self.n_s, self.n_a, self.n_y = model.n_s, model.n_actions, model.n_y
        self.lossless = objective in ("lossless", "encoder-lossless")
        self.n_u = 1 if self.lossless else n_aux
        self.m = self.n_a * self.n_u

    def __call__(self, k):
        """Rates, distortions, costs and decoder tables for kernels ``k`` of shape (B, S, A*U)."""
        b = k.shape[0]
        q = k.reshape(b, self.n_s, self.n_a, self.n_u)
        p = self.ps[None, :, None, None, None] * q[..., None] * self.w[None, :, :, None, :]
        # axes: 0 batch, 1 S, 2 A, 3 U, 4 Y
        cost = np.einsum("s,bsau,a->b", self.ps, q, self.cost)
        if self.objective == "lossless":
            rate = (_h(p, (1,)) + _h(p, (2,)) - _h(p, (1, 2))
                    + _h(p, (1, 2, 4)) - _h(p, (2, 4)))
            return rate, np.zeros(b), cost, None
        if self.objective == "encoder-lossless":
            rate = _h(p, (1,)) - _h(p, (4,)) - _h(p, (1, 2)) + _h(p, (1, 2, 4))
            return rate, np.zeros(b), cost, None
        if self.objective == "causal":
            rate = _h(p, (1,)) + _h(p, (2, 3)) - _h(p, (1, 2, 3))
        else:
            rate = (_h(p, (1,)) + _h(p, (2,)) - _h(p, (1, 2))
                    + _h(p, (1, 2, 4)) + _h(p, (2, 3, 4)) - _h(p, (1, 2, 3, 4)) - _h(p, (2, 4)))
        cell = np.einsum("s,bsau,sayh->buyh", self.ps, q, self.wd)
        table = cell.argmin(axis=3)
        dist = cell.min(axis=3).sum(axis=(1, 2))
        return np.maximum(rate, 0.0), dist, cost, table


def _evaluate(scorer, kernels, lam_d, lam_c, constraint):
    rate, dist, cost, table = scorer(kernels)
    score = rate + lam_d * dist + lam_c * cost
    if constraint is not None:
        d, c = constraint
        ok = np.ones_like(score, dtype=bool)
        if d is not None:
            ok &= dist <= d + 1e-12
        if c is not None:
            ok &= cost <= c + 1e-12
        score = np.where(ok, score, np.inf)
    return score, rate, dist, cost, table


def _search(scorer, rows, lam_d, lam_c, constraint, keep):
    """Best ``keep`` kernels over the product grid ``rows[0] x ... x rows[S-1]``."""
    sizes = [r.shape[0] for r in rows]
    total = int(np.prod(sizes))
    best_s = np.full(0, np.inf)
    best_k = np.zeros((0, len(rows), scorer.m))
    for start in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(start, min(start + CHUNK, total)), sizes)
        k = np.stack([rows[s][idx[s]] for s in range(len(rows))], axis=1)
        score = _evaluate(scorer, k, lam_d, lam_c, constraint)[0]
        cat_s = np.concatenate([best_s, score])
        cat_k = np.concatenate([best_k, k])
        order = np.argsort(cat_s, kind="stable")[:keep]
        best_s, best_k = cat_s[order], cat_k[order]
    return best_s, best_k


def _canonical(kernel, n_a, n_u):
    """Kernel with the auxiliary symbols sorted, so relabelled copies compare equal."""
    q = kernel.reshape(kernel.shape[0], n_a, n_u)
    cols = q.transpose(2, 0, 1).reshape(n_u, -1)
    order = np.lexsort(cols.T[::-1])
    return q[:, :, order].ravel()


def _distinct(scores, kernels, radius, count, n_a, n_u):
    picked, canon = [], []
    for i in range(scores.size):
        if not np.isfinite(scores[i]):
            break
        c = _canonical(kernels[i], n_a, n_u)
        if all(np.abs(c - o).max() > radius for o in canon):
            picked.append(i)
            canon.append(c)
            if len(picked) == count:
                break
    return picked


def _polish(scorer, scores, kernels, r, lam_d, lam_c, constraint, starts, steps):
    """Pattern search on the simplex product around several grid minimisers."""
    moves = simplex_grid(scorer.m, 2)
    best_s, best_k = [scores[:1]], [kernels[:1]]
    for i in _distinct(scores, kernels, 1.5 / r, starts, scorer.n_a, scorer.n_u):
        centre, value, scale = kernels[i], scores[i], 1.0 / r
        for _ in range(steps):
            rows = [centre[s] + scale * (moves - centre[s]) for s in range(scorer.n_s)]
            s2, k2 = _search(scorer, rows, lam_d, lam_c, constraint, keep=1)
            if s2[0] < value - 1e-15:
                centre, value = k2[0], s2[0]
            else:
                scale *= 0.5
                if scale < 1e-6:
                    break
        best_s.append(np.array([value]))
        best_k.append(centre[None])
    cat_s, cat_k = np.concatenate(best_s), np.concatenate(best_k)
    order = np.argsort(cat_s, kind="stable")
    return cat_s[order], cat_k[order]


def affordable_resolution(spec: ProblemSpec, n_aux: int, budget: int, cap: int) -> int:
    """Largest grid resolution ``<= cap`` whose product grid fits the budget (at least 2)."""
    m = spec.n_actions * n_aux
    n_s = spec.source_model.n_s
    r = cap
    while r > 2 and comb(r + m - 1, m - 1) ** n_s > budget:
        r -= 1
    return r


def grid_oracle(objective: str, spec: ProblemSpec, weights: LagrangeWeights,
                resolution: int | None = None, n_aux: int = 2, cfg: SolverConfig | None = None,
                constraint: tuple[float | None, float | None] | None = None,
                starts: int = 16, steps: int = 80, budget: int | None = None) -> PolicyPoint:
    """Grid minimum of ``rate + lambda_d D + lambda_c C`` (optionally under ``D <= d, C <= c``).

    ``resolution`` defaults to ``cfg.grid_resolution``. The best ``starts``
    mutually distant grid points are then polished by a shrinking pattern
    search (at most ``steps`` moves each). Raises ``ValueError`` when the
    uniform product grid exceeds the budget.
    """
    cfg = cfg or SolverConfig()
    objective = _ALIASES.get(objective, objective)
    if objective not in ORACLE_OBJECTIVES:
        raise ValueError(f"grid_oracle supports {ORACLE_OBJECTIVES}, not {objective!r}")
    if (objective == "indirect") != (spec.mode == "indirect"):
        raise ValueError("the indirect objective needs an indirect-mode ProblemSpec and vice versa")
    r = resolution or cfg.grid_resolution
    budget = budget or cfg.oracle_budget
    scorer = _Scorer(objective, spec, n_aux)
    per_row = comb(r + scorer.m - 1, scorer.m - 1)
    total = per_row ** scorer.n_s
    if total > budget:
        raise ValueError(f"grid of {total} kernels exceeds the budget of {budget}; "
                         f"reduce the resolution or the alphabet sizes")
    lam_d, lam_c = weights.lambda_d, weights.lambda_c
    base = simplex_grid(scorer.m, r)
    scores, kernels = _search(scorer, [base] * scorer.n_s, lam_d, lam_c, constraint, keep=256)
    if not np.isfinite(scores[0]):
        raise ValueError("no grid point satisfies the constraints")
    scores, kernels = _polish(scorer, scores, kernels, r, lam_d, lam_c, constraint, starts, steps)
    k = kernels[:1]
    score, rate, dist, cost, table = _evaluate(scorer, k, lam_d, lam_c, constraint)
    return PolicyPoint(StochasticKernel(k[0] / k[0].sum(axis=1, keepdims=True)),
                       None if table is None else table[0],
                       float(rate[0]), float(dist[0]), float(cost[0]), float(score[0]))
