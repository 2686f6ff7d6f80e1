"""Constrained minimisation of information functionals over simplex products.

Two layers:

* :func:`descend` runs monotone multiplicative (mirror-descent) updates on a
  functional for fixed Lagrange weights, with step backtracking.
* :class:`Envelope` turns Lagrangian solutions into the constrained tradeoff
  ``min R s.t. D <= d, C <= c``. Computed ``(R, D, C)`` points are mixed by a
  small linear programme (time sharing), the programme's duals choose the
  next weights, and the Lagrangian value at the new point certifies a lower
  bound. Iteration stops once the two bounds meet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import linprog

from sivending import functionals as fl
from sivending.info import StochasticKernel
from sivending.problem import ProblemSpec, SourceModel

OBJECTIVES = ("decoder", "independent", "causal", "indirect", "lossless", "encoder-lossless")
_ALIASES = {"decoder-independent": "independent", "wyner-ziv": "decoder"}
SLACK = 1e-10
ALPHA_MAX = 1e8
LP_CHECK = 1e-9


@dataclass(frozen=True)
class StepSchedule:
    """Mirror-descent step: start at ``initial``, grow after success, shrink after failure."""

    initial: float = 1.0
    decay: float = 0.5
    growth: float = 1.5
    max_step: float = 4.0
    min_step: float = 1e-4

    def __post_init__(self):
        if not 0 < self.decay < 1 or self.growth < 1:
            raise ValueError("need 0 < decay < 1 and growth >= 1")
        if not 0 < self.min_step <= self.initial <= self.max_step:
            raise ValueError("need 0 < min_step <= initial <= max_step")


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 1000
    objective_tol: float = 1e-9
    step_schedule: StepSchedule = field(default_factory=StepSchedule)
    restarts: int = 8
    seed: int = 0
    grid_resolution: int = 12
    lambda_range: tuple[float, float] = (1e-3, 1e3)
    lambda_points: int = 40
    envelope_tol: float = 1e-7
    envelope_rounds: int = 80
    oracle_budget: int = 4_000_000

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        if not self.objective_tol > 0:
            raise ValueError("objective_tol must be positive")
        lo, hi = self.lambda_range
        if not 0 < lo < hi or self.lambda_points < 1:
            raise ValueError("lambda_range must satisfy 0 < lo < hi and lambda_points >= 1")


@dataclass(frozen=True)
class LagrangeWeights:
    lambda_d: float = 0.0
    lambda_c: float = 0.0

    def __post_init__(self):
        for name in ("lambda_d", "lambda_c"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")


@dataclass(frozen=True)
class PolicyPoint:
    """A solved policy: ``P_{A,U|X}`` (columns ``a * |U| + u``), decoder table ``g[u, y]`` and its costs.

    Lossless functionals carry ``|U| = 1`` and ``decoder = None``.
    """

    p_au_given_x: StochasticKernel
    decoder: np.ndarray | None
    rate: float
    distortion: float
    cost: float
    lagrangian: float
    converged: bool = True
    iterations: int = 0
    restart: int = 0


@dataclass
class DescentResult:
    state: Any
    value: float
    iterations: int
    converged: bool
    history: list[float]


def descend(fn, state, lam_d: float, lam_c: float, allowed, cfg: SolverConfig,
            record: bool = False) -> DescentResult:
    """Monotone mirror-descent on ``fn`` from ``state``; only improving steps are accepted.

    Stops once the decrease still to come, extrapolated from the geometric
    decay of the last few per-step gains, falls below ``cfg.objective_tol``.
    """
    sched = cfg.step_schedule
    value = fn.lagrangian(state, lam_d, lam_c)
    if not np.isfinite(value):
        raise FloatingPointError("objective is not finite at the initial point")
    if fn.convex and isinstance(state, np.ndarray):
        return _squarem(fn, state, value, lam_d, lam_c, allowed, cfg, record)
    eta = sched.initial
    history = [value] if record else []
    gains: list[float] = []
    converged = False
    it = 0
    while it < cfg.max_iters:
        it += 1
        cand = fn.step(state, lam_d, lam_c, eta, allowed)
        cval = fn.lagrangian(cand, lam_d, lam_c)
        if not cval <= value:
            if eta * sched.decay < sched.min_step or (fn.convex and eta <= 1.0):
                converged = True
                break
            eta *= sched.decay
            continue
        gains.append(value - cval)
        state, value = cand, cval
        if record:
            history.append(value)
        if _remaining(gains) < cfg.objective_tol:
            converged = True
            break
        eta = min(eta * sched.growth, sched.max_step)
    return DescentResult(state, value, it, converged, history)


def _squarem(fn, q, value, lam_d, lam_c, allowed, cfg, record):
    """Blahut-Arimoto steps accelerated by squared extrapolation in log space.

    Each cycle takes two plain steps ``q1, q2`` and tries the extrapolated
    point (followed by one plain step); the extrapolation is kept only when it
    beats ``q2``, so the objective never increases.
    """
    history = [value] if record else []
    gains: list[float] = []
    converged = False
    certify = hasattr(fn, "log_target")
    it = 0

    def plain(x):
        return fn.step(x, lam_d, lam_c, 1.0, allowed)

    def logs(x):
        return np.log(np.where(allowed, x, 1.0))

    while it < cfg.max_iters:
        it += 1
        q1 = plain(q)
        q2 = plain(q1)
        best, best_v = q2, fn.lagrangian(q2, lam_d, lam_c)
        z0, z1, z2 = logs(q), logs(q1), logs(q2)
        r, v = z1 - z0, z2 - 2 * z1 + z0
        nv = np.sqrt(np.sum(v * v))
        alpha = -np.sqrt(np.sum(r * r)) / nv if nv > 0 else -ALPHA_MAX
        alpha = max(alpha, -ALPHA_MAX)
        # a nearly straight path gives a huge step; halve towards a plain step until it helps
        while alpha < -1.0:
            z = z0 - 2 * alpha * r + alpha * alpha * v
            z = np.where(allowed, z - np.max(np.where(allowed, z, -np.inf), axis=1, keepdims=True),
                         -np.inf)
            cand = plain(fl.mirror_rows(q, z, 1.0, allowed))
            cv = fn.lagrangian(cand, lam_d, lam_c)
            if cv < best_v:
                best, best_v = cand, cv
                break
            alpha = (alpha - 1.0) / 2.0
        if not best_v <= value:
            # no further progress in floating point
            converged = not certify or fl.frank_wolfe_gap(fn, q, lam_d, lam_c, allowed) <= cfg.objective_tol
            break
        gains.append(value - best_v)
        q, value = best, best_v
        if record:
            history.append(value)
        if certify:
            if fl.frank_wolfe_gap(fn, q, lam_d, lam_c, allowed) <= cfg.objective_tol:
                converged = True
                break
        elif (_remaining(gains, window=5) < cfg.objective_tol
                or gains[-1] < 1e-3 * cfg.objective_tol * max(1.0, abs(value))):
            converged = True
            break
    return DescentResult(q, value, it, converged, history)


def _remaining(gains, window=10):
    """Tail-sum estimate of future decrease assuming geometric decay of the gains."""
    g = gains[-1]
    if g <= 0.0:
        return 0.0
    if len(gains) <= window:
        return np.inf
    past = gains[-1 - window]
    if past <= g:
        return g * 1e3
    rho = (g / past) ** (1.0 / window)
    return g * rho / (1.0 - rho)


def make_functional(objective: str, spec: ProblemSpec, parameterization: str = "labels",
                    n_aux: int | None = None):
    """Functional instance for a registered objective name."""
    objective = _ALIASES.get(objective, objective)
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    if (objective == "indirect") != (spec.mode == "indirect"):
        raise ValueError("the indirect objective needs an indirect-mode ProblemSpec and vice versa")
    model = spec.source_model
    return functional_for_model(objective, model, parameterization, n_aux)


def functional_for_model(objective: str, model: SourceModel, parameterization: str = "labels",
                         n_aux: int | None = None):
    if parameterization not in ("labels", "joint"):
        raise ValueError("parameterization must be 'labels' or 'joint'")
    if objective in ("decoder", "indirect", "causal"):
        causal = objective == "causal"
        if parameterization == "joint":
            k = n_aux if n_aux is not None else model.n_s * model.n_actions + 2
            return fl.JointDecoder(model, k, causal=causal)
        return fl.LabelDecoder(model, causal=causal)
    if parameterization == "joint":
        raise ValueError(f"objective {objective!r} has no joint parameterisation")
    if objective == "independent":
        return fl.IndependentActions(model)
    if objective == "lossless":
        return fl.LosslessDecoder(model)
    return fl.EncoderLossless(model)


def _to_point(fn, res: DescentResult, lam_d, lam_c, restart=0) -> PolicyPoint:
    rate, dist, cost = fn.measure(res.state)
    kernel, table = fn.kernel(res.state)
    return PolicyPoint(StochasticKernel(kernel / kernel.sum(axis=1, keepdims=True)), table,
                       max(rate, 0.0), dist, cost, res.value, res.converged, res.iterations, restart)


def minimize_lagrangian(objective: str, spec: ProblemSpec, weights: LagrangeWeights,
                        cfg: SolverConfig | None = None, parameterization: str = "labels",
                        n_aux: int | None = None) -> PolicyPoint:
    """Minimise ``rate + lambda_d * D + lambda_c * C`` for a registered objective.

    The label parameterisation is convex and solved from the uniform kernel.
    The joint parameterisation alternates kernel steps with decoder resets and
    keeps the best of ``cfg.restarts`` seeded random starts.
    """
    cfg = cfg or SolverConfig()
    fn = make_functional(objective, spec, parameterization, n_aux)
    return _minimize(fn, weights.lambda_d, weights.lambda_c, cfg)


def _minimize(fn, lam_d, lam_c, cfg, mask_d=False, mask_c=False) -> PolicyPoint:
    allowed = fn.allowed(mask_d, mask_c)
    res, r = _best_descent(fn, lam_d, lam_c, cfg, allowed)
    return _to_point(fn, res, lam_d, lam_c, r)


def _best_descent(fn, lam_d, lam_c, cfg, allowed, warm=None):
    """Single run for convex functionals, seeded multi-start otherwise (ties keep the earliest)."""
    if fn.convex:
        start = fn.initial(allowed) if warm is None else warm
        res = descend(fn, start, lam_d, lam_c, allowed, cfg)
        if hasattr(fn, "select"):
            res.state, res.value = fn.select(res.state, lam_d, lam_c)
        return res, 0
    best, best_r = None, 0
    if warm is not None:
        best, best_r = descend(fn, warm, lam_d, lam_c, allowed, cfg), -1
    for r in range(cfg.restarts):
        if r == 0 and isinstance(fn, fl.JointDecoder):
            start = _label_start(fn, lam_d, lam_c, cfg, allowed)
        else:
            start = fn.initial(allowed, np.random.default_rng([cfg.seed, r]))
        res = descend(fn, start, lam_d, lam_c, allowed, cfg)
        if best is None or res.value < best.value:
            best, best_r = res, r
    return best, best_r


def _label_start(fn, lam_d, lam_c, cfg, allowed):
    """Joint-form start built from the convex label solution (top ``|U|`` labels per action)."""
    try:
        lab = fl.LabelDecoder(fn.model, causal=fn.causal)
    except ValueError:
        return fn.initial(allowed, np.random.default_rng([cfg.seed, 0]))
    lab_ok = lab.allowed(False, False)
    q = descend(lab, lab.initial(lab_ok), lam_d, lam_c, lab_ok, cfg).state
    mass = fn.model.ps @ q
    m = fn.model
    q3 = np.zeros((m.n_s, m.n_actions, fn.n_aux))
    for a in range(m.n_actions):
        cols = np.flatnonzero(lab.labels.action == a)
        top = cols[np.argsort(-mass[cols], kind="stable")[:fn.n_aux]]
        q3[:, a, :top.size] = q[:, top]
    q = np.where(allowed, q3.reshape(fn.shape) + 1e-6, 0.0)
    q /= q.sum(axis=1, keepdims=True)
    return fl.JointState(q, fn.reset_decoder(q))


# ---------------------------------------------------------------- envelope


@dataclass(frozen=True)
class Vertex:
    rate: float
    distortion: float
    cost: float


@dataclass
class EnvelopeResult:
    rate: float
    lower: float
    feasible: bool
    rounds: int
    weights: tuple[float, float] = (0.0, 0.0)


def _lp_feasible(x, kw, tol):
    """Guard against a simplex answer that breaks the constraints."""
    if abs(x.sum() - 1.0) > tol:
        return False
    return "A_ub" not in kw or bool(np.all(kw["A_ub"] @ x <= kw["b_ub"] + tol))


def mix(points, d, c, use_d=True, use_c=True):
    """Least time-shared rate over ``points`` meeting ``D <= d`` and ``C <= c``.

    Returns ``(value, theta, lam_d, lam_c)`` or ``None`` when infeasible.
    """
    r = np.array([p.rate for p in points])
    rows, rhs = [], []
    if use_d:
        rows.append([p.distortion for p in points])
        rhs.append(d + SLACK)
    if use_c:
        rows.append([p.cost for p in points])
        rhs.append(c + SLACK)
    kw = dict(A_ub=np.array(rows), b_ub=np.array(rhs)) if rows else {}
    res = None
    for method in ("highs-ds", "highs-ipm"):
        res = linprog(r, A_eq=np.ones((1, r.size)), b_eq=[1.0], bounds=(0, None), method=method, **kw)
        if res.status != 0 or _lp_feasible(res.x, kw, LP_CHECK):
            break
    if res.status != 0:
        return None
    duals = -np.asarray(res.ineqlin.marginals) if rows else np.zeros(0)
    lam = iter(np.maximum(duals, 0.0))
    lam_d = float(next(lam)) if use_d else 0.0
    lam_c = float(next(lam)) if use_c else 0.0
    return float(res.fun), res.x, lam_d, lam_c


class Envelope:
    """Lower convex envelope of a functional's ``(R, D, C)`` region, built on demand."""

    LAMBDA_CAP = 1e4

    def __init__(self, fn, cfg: SolverConfig):
        self.fn = fn
        # feasibility is decided on the label form, which spans every policy
        needs_labels = fn.has_distortion and not (hasattr(fn, "dbar") or hasattr(fn, "inner"))
        self.label_fn = (fl.LabelDecoder(fn.model, causal=getattr(fn, "causal", False))
                         if needs_labels else fn)
        self.cfg = cfg
        self.vertices: list[Vertex] = []
        self.last_converged = True
        self.states: list[Any] = []
        self.masks: list[tuple[bool, bool]] = []
        cost = fn.model.cost
        self.c_min, self.c_max = float(cost.min()), float(cost.max())
        self.d_min = self.min_distortion(self.c_max)[0] if fn.has_distortion else 0.0

    # feasibility ------------------------------------------------------
    def min_distortion(self, c: float, allowed=None):
        """Least distortion at cost ``<= c`` over all kernels (an LP), with a minimising kernel."""
        fn = self.label_fn
        if allowed is None or fn is not self.fn:
            allowed = fn.allowed(False, False)
        if isinstance(fn, fl.IndependentActions):
            return self._min_distortion_independent(c, allowed)
        ps = fn.model.ps
        dbar = getattr(fn, "dbar", np.zeros(fn.shape))
        cost = np.broadcast_to(fn.cost_l if hasattr(fn, "cost_l") else fn.model.cost, fn.shape)
        n_s, k = fn.shape
        obj = (ps[:, None] * dbar).ravel()
        a_ub = (ps[:, None] * cost).ravel()[None, :]
        a_eq = np.kron(np.eye(n_s), np.ones((1, k)))
        bounds = [(0, None) if ok else (0, 0) for ok in allowed.ravel()]
        res = linprog(obj, A_ub=a_ub, b_ub=[c + SLACK], A_eq=a_eq, b_eq=np.ones(n_s),
                      bounds=bounds, method="highs")
        if res.status != 0:
            return np.inf, None
        q = res.x.reshape(n_s, k)
        q = np.where(allowed, np.maximum(q, 0.0), 0.0)
        q /= q.sum(axis=1, keepdims=True)
        return float(res.fun), q

    def _min_distortion_independent(self, c, allowed):
        fn = self.fn
        m = fn.model
        dbar = np.where(allowed, fn.inner.dbar, np.inf)
        best_rule = np.zeros((m.n_s, m.n_actions), dtype=int)
        d_a = np.zeros(m.n_actions)
        for a in range(m.n_actions):
            cols = np.flatnonzero(fn.labels.action == a)
            sub = dbar[:, cols]
            best_rule[:, a] = cols[np.argmin(sub, axis=1)]
            d_a[a] = m.ps @ sub.min(axis=1)
        ok = np.isfinite(d_a)
        res = linprog(np.where(ok, d_a, 0.0), A_ub=m.cost[None, :], b_ub=[c + SLACK],
                      A_eq=np.ones((1, m.n_actions)), b_eq=[1.0],
                      bounds=[(0, None) if o else (0, 0) for o in ok], method="highs")
        if res.status != 0:
            return np.inf, None
        pa = np.maximum(res.x, 0.0)
        qa = np.zeros(fn.shape)
        for a in range(m.n_actions):
            qa[np.arange(m.n_s), best_rule[:, a]] = 1.0
        return float(res.fun), fl.IndependentState(pa / pa.sum(), qa)

    # point generation -------------------------------------------------
    def kernel_at(self, d: float, c: float):
        """Kernel mixing the current points at ``(d, c)`` (label or array states only).

        By convexity its objective is at most the envelope value there, while
        distortion and cost mix linearly.
        """
        _, _, use_d, use_c = self._flags(d, c)
        out = mix(self.vertices, d, c, use_d, use_c)
        if out is None:
            return None
        theta = out[1]
        q = sum(t * st for t, st in zip(theta, self.states) if t > 0 and st is not None)
        return q / q.sum(axis=1, keepdims=True)

    def _add(self, state, mask, fn=None):
        rate, dist, cost = (fn or self.fn).measure(state)
        v = Vertex(rate, dist, cost)
        for old in self.vertices:
            if (abs(old.rate - v.rate) < 1e-12 and abs(old.distortion - v.distortion) < 1e-12
                    and abs(old.cost - v.cost) < 1e-12):
                return old, False
        self.vertices.append(v)
        self.states.append(state if fn is None else None)
        self.masks.append(mask)
        return v, True

    def _add_with_companions(self, state, mask):
        """Add ``state`` and any extra states its functional derives from it."""
        v, new = self._add(state, mask)
        for extra in getattr(self.fn, "companions", lambda _: ())(state):
            new = self._add(extra, mask)[1] or new
        return v, new

    def _warm(self, state, allowed):
        fn = self.fn
        if hasattr(fn, "warm"):
            return fn.warm(state, allowed)
        if isinstance(state, fl.JointState):
            q = np.where(allowed, 0.9 * state.q + 0.1 / state.q.shape[1], 0.0)
            q /= q.sum(axis=1, keepdims=True)
            return fl.JointState(q, fn.reset_decoder(q))
        if isinstance(state, fl.IndependentState):
            qa = np.where(allowed, 0.9 * state.qa + 0.1, 0.0)
            return fl.IndependentState(fn.spread(allowed), fn._block_normalise(qa, allowed))
        q = np.where(allowed, 0.9 * state + 0.1 / state.shape[1], 0.0)
        return q / q.sum(axis=1, keepdims=True)

    def solve(self, lam_d, lam_c, mask_d=False, mask_c=False, warm=None):
        fn = self.fn
        allowed = fn.allowed(mask_d, mask_c)
        start = self._warm(warm, allowed) if warm is not None else None
        res = _best_descent(fn, lam_d, lam_c, self.cfg, allowed, start)[0]
        self.last_converged = res.converged
        return res.state

    def _gap(self, state, lam_d, lam_c, mask_d, mask_c):
        fn = self.fn
        if fn.convex and isinstance(state, np.ndarray) and hasattr(fn, "log_target"):
            return fl.frank_wolfe_gap(fn, state, lam_d, lam_c, fn.allowed(mask_d, mask_c))
        return 0.0 if self.last_converged else np.inf

    def seed(self, lam_ds, lam_cs, mask_d=False, mask_c=False):
        warm = None
        for lc in lam_cs:
            for ld in lam_ds:
                warm = self.solve(ld, lc, mask_d, mask_c, warm)
                self._add_with_companions(warm, (mask_d, mask_c))

    # constrained minimisation ----------------------------------------
    def _flags(self, d, c):
        fn = self.fn
        mask_d = fn.has_distortion and fn.pins_distortion and d <= self.d_min + 1e-12
        mask_c = c <= self.c_min + 1e-12
        use_d = fn.has_distortion
        use_c = c < self.c_max - 1e-12
        return mask_d, mask_c, use_d, use_c

    def feasible(self, d, c) -> bool:
        if c < self.c_min - 1e-12:
            return False
        if not self.fn.has_distortion:
            return True
        return d >= self.min_distortion(min(c, self.c_max))[0] - 1e-12

    def value(self, d, c):
        """LP value over the current points (no new solves); ``inf`` if none qualifies."""
        _, _, use_d, use_c = self._flags(d, c)
        out = mix(self.vertices, d, c, use_d, use_c) if self.vertices else None
        return np.inf if out is None else out[0]

    def minimize(self, d: float, c: float, floor: float = -np.inf) -> EnvelopeResult:
        """Least time-shared rate at ``(d, c)``; stops early once it reaches a known ``floor``."""
        fn, cfg = self.fn, self.cfg
        if not self.feasible(d, c):
            return EnvelopeResult(np.inf, np.inf, False, 0)
        mask_d, mask_c, use_d, use_c = self._flags(d, c)
        mask = (mask_d, mask_c)
        if mask not in self.masks:
            self.seed([1.0 if use_d and not mask_d else 0.0], [1.0 if use_c and not mask_c else 0.0],
                      mask_d, mask_c)
        lower = -np.inf
        lam_d = lam_c = 0.0
        upper = np.inf
        rounds = 0
        while rounds < cfg.envelope_rounds:
            rounds += 1
            out = mix(self.vertices, d, c, use_d, use_c)
            if out is None:
                _, q = self.min_distortion(min(c, self.c_max), fn.allowed(mask_d, mask_c))
                if q is None:
                    return EnvelopeResult(np.inf, np.inf, False, rounds)
                if self.label_fn is self.fn:
                    self._add(q, mask)
                else:
                    self._add(q, None, self.label_fn)
                out = mix(self.vertices, d, c, use_d, use_c)
                if out is None:
                    return EnvelopeResult(np.inf, np.inf, False, rounds)
            upper, theta, lam_d, lam_c = out
            if upper <= floor + cfg.envelope_tol:
                break
            lam_d = 0.0 if mask_d else min(lam_d, self.LAMBDA_CAP)
            lam_c = 0.0 if mask_c else min(lam_c, self.LAMBDA_CAP)
            idx = [i for i in np.argsort(-theta) if self.masks[i] == mask and self.states[i] is not None]
            warm = self.states[idx[0]] if idx else None
            state = self.solve(lam_d, lam_c, mask_d, mask_c, warm)
            v, new = self._add_with_companions(state, mask)
            # only the true Lagrangian minimum gives a cut; a convex solve is
            # discounted by its duality gap, any other counts only if converged
            slack = self._gap(state, lam_d, lam_c, mask_d, mask_c)
            if np.isfinite(slack):
                bound = (v.rate + lam_d * (v.distortion - d) * use_d + lam_c * (v.cost - c) * use_c
                         - slack)
                lower = max(lower, bound)
            if upper - lower <= cfg.envelope_tol or not new:
                break
        return EnvelopeResult(upper, min(lower, upper), True, rounds, (lam_d, lam_c))

    def sweep(self, lam_values=None):
        """Seed the point set over a geometric grid of weights on the active axes."""
        cfg = self.cfg
        if lam_values is None:
            lam_values = np.geomspace(*cfg.lambda_range, cfg.lambda_points)
        lam_ds = lam_values if self.fn.has_distortion else [0.0]
        lam_cs = lam_values if self.c_max > self.c_min else [0.0]
        self.seed(lam_ds, lam_cs)
        if self.fn.has_distortion:
            self.seed([0.0], lam_cs, mask_d=True)
        if self.c_max > self.c_min:
            self.seed(lam_ds, [0.0], mask_c=True)


@dataclass
class TradeoffCurve:
    """Swept tradeoff: the computed ``(rate, distortion, cost)`` points and the grid answers.

    ``rows`` holds ``(d, c, rate, lower, feasible)``. Between points the
    envelope is the time-sharing LP over ``points``; :meth:`rate_at`
    evaluates it anywhere.
    """

    points: list[tuple[float, float, float]]
    rows: list[tuple[float, float, float, float, bool]]
    has_distortion: bool = True
    cost_range: tuple[float, float] = (0.0, 0.0)
    clip: bool = True

    def rate_at(self, d: float, c: float) -> float:
        verts = [Vertex(*p) for p in self.points]
        use_c = c < self.cost_range[1] - 1e-12
        out = mix(verts, d, c, self.has_distortion, use_c)
        if out is None:
            return np.inf
        return max(out[0], 0.0) if self.clip else out[0]

    def grid(self, d_grid, c_grid) -> np.ndarray:
        """Rates as a ``(len(d_grid), len(c_grid))`` array (``inf`` where infeasible)."""
        out = np.full((len(d_grid), len(c_grid)), np.inf)
        for d, c, rate, _, ok in self.rows:
            if ok:
                out[list(d_grid).index(d), list(c_grid).index(c)] = rate
        return out


def _check_grid(grid, name):
    arr = np.asarray(grid, float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d grid")
    if np.any(np.diff(arr) < 0):
        raise ValueError(f"{name} must be sorted ascending")
    return [float(x) for x in arr]


def sweep_tradeoff(objective: str, spec: ProblemSpec, d_grid, c_grid,
                   cfg: SolverConfig | None = None, lam_values=None) -> TradeoffCurve:
    """Least rate on every ``(d, c)`` of the grids.

    A geometric sweep of Lagrange weights seeds the point set; each target is
    then refined by column generation, and all targets are finally re-read
    from the common envelope so the answers are monotone and convex.
    """
    cfg = cfg or SolverConfig()
    fn = make_functional(objective, spec)
    return sweep_functional(fn, d_grid, c_grid, cfg, lam_values)


def sweep_functional(fn, d_grid, c_grid, cfg: SolverConfig, lam_values=None,
                     seed_sweep: bool = True) -> TradeoffCurve:
    """:func:`sweep_tradeoff` for a functional instance; ``seed_sweep=False`` skips the weight sweep."""
    d_grid = _check_grid(d_grid, "d_grid")
    c_grid = _check_grid(c_grid, "c_grid")
    env = Envelope(fn, cfg)
    if seed_sweep:
        env.sweep(lam_values)
    status = {}
    for c in c_grid:
        for d in d_grid:
            status[(d, c)] = env.minimize(d, c)
    rows = []
    clip = not isinstance(fn, fl.EncoderLossless)
    for c in c_grid:
        for d in d_grid:
            res = status[(d, c)]
            if not res.feasible:
                rows.append((d, c, np.inf, np.inf, False))
                continue
            value = env.value(d, c)
            lo = min(res.lower, value)
            if clip:
                value, lo = max(value, 0.0), max(lo, 0.0)
            rows.append((d, c, value, lo, True))
    points = [(v.rate, v.distortion, v.cost) for v in env.vertices]
    return TradeoffCurve(points, rows, fn.has_distortion, (env.c_min, env.c_max), clip)


def constrained_rate(fn, d: float, c: float, cfg: SolverConfig, envelope: Envelope | None = None):
    """Least rate of ``fn`` at a single ``(d, c)`` target; returns the envelope result."""
    env = envelope or Envelope(fn, cfg)
    return env.minimize(d, c)
