"""Acceptance checks: the headline numbers and the randomized property suites.

Each criterion returns a :class:`Check`. :func:`run` evaluates a selection
and is shared by ``sivending validate`` and the test suite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from sivending import functionals as fl
from sivending.decoder import (
    greedy_rate,
    lossless_rate_decoder,
    rdc_causal,
    rdc_decoder,
    rdc_independent,
    timeshare_bound,
)
from sivending.encoder import encoder_bounds, encoder_lossless_rate, gaussian_rdc, markov_rdc
from sivending.figures import fig5, zs_instance
from sivending.info import (
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    factorize,
    mutual_information,
)
from sivending.oracle import affordable_resolution, grid_oracle
from sivending.problem import GaussianSpec, ProblemSpec
from sivending.simplex import (
    LagrangeWeights,
    SolverConfig,
    make_functional,
    minimize_lagrangian,
    sweep_functional,
)

SEED = 20240607


@dataclass(frozen=True)
class Check:
    number: int
    title: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] criterion {self.number}: {self.title} | measured {self.measured} | "
                f"expected {self.expected} | {self.seconds:.1f}s")


# ---------------------------------------------------------------- instances


def ternary_instance(mode: str = "decoder") -> ProblemSpec:
    """X in {-1, 0, 1}; action 1 reveals the sign (0 maps to a fair sign), action 0 erases."""
    w = np.zeros((3, 2, 3))
    w[:, 0, 2] = 1.0
    w[0, 1] = [1.0, 0.0, 0.0]
    w[1, 1] = [0.5, 0.5, 0.0]
    w[2, 1] = [0.0, 1.0, 0.0]
    return ProblemSpec([0.25, 0.5, 0.25], w.reshape(6, 3), 1.0 - np.eye(3), [0.0, 1.0], mode)


def bsc_markov_instance(p: float) -> ProblemSpec:
    """Fair bit, Hamming loss, ``Y`` the output of BSC(p) fed with the action."""
    row = np.array([[1.0 - p, p], [p, 1.0 - p]])
    w = np.stack([row, row])
    return ProblemSpec([0.5, 0.5], w.reshape(4, 2), 1.0 - np.eye(2), [0.0, 1.0], "encoder-markov")


def random_instance(rng, nx=2, na=2, ny=2, mode="decoder", concentration=0.7) -> ProblemSpec:
    px = rng.dirichlet(np.ones(nx))
    w = rng.dirichlet(np.full(ny, concentration), nx * na)
    cost = np.sort(rng.uniform(0.0, 1.0, na))
    cost[0] = 0.0
    return ProblemSpec(px, w, 1.0 - np.eye(nx), cost, mode)


# ---------------------------------------------------------------- criteria


def _fmt(x, digits=7):
    return f"{x:.{digits}f}"


def criterion_1(cfg):
    spec = zs_instance(0.5)
    rate = lossless_rate_decoder(spec, 1.0, cfg)
    k = minimize_lagrangian("lossless", spec, LagrangeWeights(), cfg).p_au_given_x.rows
    alpha = 0.5 * (k[0, 1] + k[1, 0])
    ok = abs(rate - 0.678072) <= 1e-4 and abs(alpha - 0.4) <= 1e-3
    return Check(1, "Z/S lossless optimum", ok, f"R={_fmt(rate)}, alpha={alpha:.5f}",
                 "R=0.678072+-1e-4, alpha=0.4+-1e-3")


def criterion_2(cfg):
    delta = 0.5
    closed = binary_entropy(delta / (1 + delta)) * (1 + delta) / 2
    greedy = greedy_rate(zs_instance(delta), 0.0, cfg)
    best = lossless_rate_decoder(zs_instance(delta), 1.0, cfg)
    ok = abs(greedy - closed) <= 1e-6 and abs(greedy - 0.688722) <= 1e-6 and greedy - best >= 0.0100
    return Check(2, "greedy baseline", ok, f"R_greedy={_fmt(greedy)}, gap={greedy - best:.6f}",
                 f"{_fmt(closed)}+-1e-6, gap>=0.0100")


def criterion_3(cfg):
    spec = zs_instance(0.5)
    rate = lossless_rate_decoder(spec, 0.25, cfg)
    chord = 2 * 0.25 * 0.678072 + (1 - 2 * 0.25) * 0.688722
    margin = chord - rate
    return Check(3, "time-sharing strictness", margin >= 1e-4,
                 f"R(1/2,1/4)={_fmt(rate)}, margin={margin:.6f}", f"chord {chord:.6f}, margin>=1e-4")


def criterion_4(cfg):
    _, rows = fig5(costs=(0.0, 0.5, 1.0))
    r0, rm, r1 = (r[1] for r in rows)
    below = 0.5 * (r0 + r1) - rm
    ok = abs(r0 - 0.188722) <= 1e-6 and abs(r1) <= 1e-9 and below >= 1e-3
    return Check(4, "erasure curve endpoints and shape", ok,
                 f"R(C=0)={_fmt(r0)}, R(C=1)={r1:.2e}, chord-mid={below:.6f}",
                 "0.188722+-1e-6, 0+-1e-9, >=1e-3")


def criterion_5(cfg):
    spec = ternary_instance()
    errs = [abs(rdc_decoder(spec, 0.0, 0.5, cfg) - 1.0)]
    for d in (0.1, 0.25):
        errs.append(abs(rdc_decoder(spec, d, 0.5, cfg) - (1 - binary_entropy(d))))
    ok = errs[0] <= 1e-3 and max(errs[1:]) <= 2e-3
    return Check(5, "ternary example", ok, "errors " + ", ".join(f"{e:.2e}" for e in errs),
                 "<=1e-3 at D=0, <=2e-3 at D=0.1,0.25")


def _gaussian_reference(d, c):
    gain = (1 + np.sqrt(c)) ** 2 + 1
    return 0.5 * np.log2(1 / gain / d) if gain * d < 1 else 0.0


def criterion_6(cfg):
    worst = 0.0
    for d in np.linspace(0.01, 0.6, 20):
        for c in np.linspace(0.0, 2.0, 20):
            worst = max(worst, abs(gaussian_rdc(GaussianSpec(1, 1, d, c)) - _gaussian_reference(d, c)))
    boundary = []
    for c in np.linspace(0.0, 2.0, 20):
        d0 = 1.0 / ((1 + np.sqrt(c)) ** 2 + 1)
        boundary += [gaussian_rdc(GaussianSpec(1, 1, d0, c)), gaussian_rdc(GaussianSpec(1, 1, 1.5 * d0, c))]
    ok = worst <= 1e-12 and all(v == 0.0 for v in boundary)
    return Check(6, "Gaussian closed form", ok,
                 f"max dev {worst:.1e}, boundary max {max(boundary):.1e}", "<=1e-12, exactly 0")


def criterion_7(cfg):
    half = markov_rdc(bsc_markov_instance(0.5), 0.25, 1.0, cfg)
    clean = markov_rdc(bsc_markov_instance(0.0), 0.25, 1.0, cfg)
    ok = abs(half - 0.188722) <= 1e-6 and clean == 0.0
    return Check(7, "Markov decomposition", ok, f"BSC(1/2): {_fmt(half)}, noiseless: {clean}",
                 "0.188722+-1e-6, 0")


def criterion_8(cfg):
    rate = encoder_lossless_rate(zs_instance(0.5, "encoder-lossless"), 1.0, cfg)
    return Check(8, "encoder lossless zero rate", abs(rate) <= 1e-6, f"{rate:.2e}", "0+-1e-6")


def criterion_9(cfg, instances=20):
    rng = np.random.default_rng(SEED + 9)
    worst = 0.0
    for _ in range(instances):
        spec = random_instance(rng)
        weights = LagrangeWeights(float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.0, 1.0)))
        res = affordable_resolution(spec, 3, cfg.oracle_budget, cfg.grid_resolution)
        ref = grid_oracle("decoder", spec, weights, res, n_aux=3, cfg=cfg).lagrangian
        for param, n_aux in (("labels", None), ("joint", 3)):
            got = minimize_lagrangian("decoder", spec, weights, cfg, param, n_aux).lagrangian
            worst = max(worst, abs(got - ref))
    return Check(9, "oracle equivalence", worst <= 2e-3, f"max |solver - oracle| = {worst:.2e}",
                 f"<=2e-3 over {instances} instances")


# ---------------------------------------------------------------- properties


def prop_factorization(rng, trials):
    """``U`` and ``Y`` are conditionally independent given ``(X, A)``; the X marginal is ``p_x``."""
    worst = 0.0
    for _ in range(trials):
        px = rng.dirichlet(np.ones(2))
        q = rng.dirichlet(np.ones(6), 2)
        w = rng.dirichlet(np.ones(2), 4)
        j = factorize(px, q, w)
        worst = max(worst, conditional_mutual_information(j, "U", "Y", ["X", "A"]),
                    np.abs(j.marginal(["X"]) - px).max())
    return worst <= 1e-12, worst


def prop_identities(rng, trials):
    worst = 0.0
    for _ in range(trials):
        px = rng.dirichlet(np.ones(2))
        q = rng.dirichlet(np.ones(4), 2)
        w = rng.dirichlet(np.ones(2), 4)
        j = factorize(px, q, w)
        lhs = mutual_information(j, "X", "A") + conditional_mutual_information(j, "X", "U", ["Y", "A"])
        rhs = (mutual_information(j, "X", ["U", "Y", "A"]) + conditional_entropy(j, "Y", ["A", "X"])
               - conditional_entropy(j, "Y", "A"))
        worst = max(worst, abs(lhs - rhs))
        pa = rng.dirichlet(np.ones(2), 2)
        j2 = factorize(px, pa, w)
        lhs = (conditional_entropy(j2, "X", ["A", "Y"]) + mutual_information(j2, "X", "A")
               - mutual_information(j2, "Y", "A"))
        rhs = entropy(px) - mutual_information(j2, "Y", ["A", "X"])
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-9, worst


def _decoder_objective(px, q, w):
    j = factorize(px, q, w)
    return mutual_information(j, "X", "A") + conditional_mutual_information(j, "X", "U", ["Y", "A"])


def prop_convexity(rng, trials):
    """Midpoint convexity of the decoder objective in ``P_{A,U|X}`` and of the lossless encoder objective."""
    worst = 0.0
    for _ in range(trials):
        px = rng.dirichlet(np.ones(2))
        w = rng.dirichlet(np.ones(2), 4)
        q1, q2 = rng.dirichlet(np.ones(6), 2), rng.dirichlet(np.ones(6), 2)
        gap = (_decoder_objective(px, (q1 + q2) / 2, w)
               - 0.5 * (_decoder_objective(px, q1, w) + _decoder_objective(px, q2, w)))
        worst = max(worst, gap)
        spec = ProblemSpec(px, w, 1.0 - np.eye(2), [0.0, 1.0], "encoder-lossless")
        fn = fl.EncoderLossless(spec.source_model)
        p1, p2 = rng.dirichlet(np.ones(2), 2), rng.dirichlet(np.ones(2), 2)
        worst = max(worst, fn.objective((p1 + p2) / 2) - 0.5 * (fn.objective(p1) + fn.objective(p2)))
    return worst <= 1e-12, worst


def prop_ordering(rng, trials, cfg):
    """decoder <= timeshare ~= independent and decoder <= causal (slack 2e-3)."""
    worst = 0.0
    for _ in range(trials):
        spec = random_instance(rng)
        d_min = spec.source_model.min_distortion()
        d = float(d_min + rng.uniform(0.0, 0.3))
        c = float(rng.uniform(0.0, spec.lam.max()))
        r = rdc_decoder(spec, d, c, cfg)
        t = timeshare_bound(spec, d, c, cfg)
        i = rdc_independent(spec, d, c, cfg)
        k = rdc_causal(spec.with_mode("causal"), d, c, cfg)
        worst = max(worst, r - t, r - i, abs(t - i), r - k)
    return worst <= 2e-3, worst


def _swept_defects(curve, d_grid, c_grid):
    grid = curve.grid(d_grid, c_grid)
    mono = max(np.diff(grid, axis=0).max(initial=0.0), np.diff(grid, axis=1).max(initial=0.0))
    conv = 0.0
    pts = [(d, c, grid[i, j]) for i, d in enumerate(d_grid) for j, c in enumerate(c_grid)]
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            (d1, c1, r1), (d2, c2, r2) = pts[a], pts[b]
            conv = max(conv, curve.rate_at((d1 + d2) / 2, (c1 + c2) / 2) - (r1 + r2) / 2)
    return max(mono, conv)


def prop_swept_curves(rng, trials, cfg):
    """Swept tradeoffs are nonincreasing in ``d`` and ``c`` and convex at midpoints."""
    worst = 0.0
    objectives = ("decoder", "independent", "causal", "lossless", "encoder-lossless")
    for t in range(trials):
        objective = objectives[t % len(objectives)]
        spec = random_instance(rng, mode="causal" if objective == "causal" else "decoder")
        fn = make_functional(objective, spec)
        d_min = spec.source_model.min_distortion()
        d_grid = [d_min + 0.05, d_min + 0.15, d_min + 0.3] if fn.has_distortion else [0.0]
        c_grid = [0.0, float(spec.lam.max()) / 2, float(spec.lam.max())]
        curve = sweep_functional(fn, d_grid, c_grid, cfg, seed_sweep=False)
        worst = max(worst, _swept_defects(curve, d_grid, c_grid))
    return worst <= 1e-9, worst


def prop_cardinality(rng, trials, cfg):
    """The free form saturates at ``|U| = |X||A| + 2``: one more symbol does not help, the label optimum is met."""
    worst = 0.0
    for _ in range(trials):
        spec = random_instance(rng)
        k = spec.n_x * spec.n_actions + 2
        weights = LagrangeWeights(float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.0, 1.0)))
        label = minimize_lagrangian("decoder", spec, weights, cfg).lagrangian
        vals = {n: minimize_lagrangian("decoder", spec, weights, cfg, "joint", n).lagrangian
                for n in (k - 1, k, k + 1)}
        worst = max(worst, abs(vals[k] - vals[k + 1]), abs(vals[k] - label), vals[k] - vals[k - 1])
    return worst <= 2e-3, worst


def prop_bounds(rng, trials, cfg):
    """``lower <= closed <= open`` (slack 1e-9); certified instances have ``upper - lower <= 2e-3``."""
    worst = 0.0
    for t in range(trials):
        markov = t % 4 == 0
        spec = random_instance(rng, nx=2, na=2, ny=2, mode="encoder-bounds")
        if markov:
            w = spec.w.copy()
            w[:] = w[0]
            spec = ProblemSpec(spec.px, w.reshape(4, 2), spec.rho, spec.cost, "encoder-bounds")
        d = 0.0 if t % 4 == 1 else float(rng.uniform(0.0, 0.3))
        c = float(rng.uniform(0.0, spec.lam.max()))
        r = encoder_bounds(spec, d, c, cfg)
        worst = max(worst, r.lower - r.upper_closed_switch, r.upper_closed_switch - r.upper_open_switch)
        if r.certified_exact:
            worst = max(worst, r.upper_closed_switch - r.lower - 2e-3 + 1e-9)
    return worst <= 1e-9, worst


PROPERTY_CFG = SolverConfig(restarts=3, max_iters=300, objective_tol=1e-8, envelope_tol=1e-6)
BOUNDS_CFG = SolverConfig(restarts=1, max_iters=100, envelope_rounds=6)


def criterion_10(cfg, trials=100):
    rng = np.random.default_rng(SEED + 10)
    light = replace(PROPERTY_CFG, seed=cfg.seed)
    suites = [
        ("factorization", lambda: prop_factorization(rng, trials)),
        ("identities", lambda: prop_identities(rng, trials)),
        ("convexity", lambda: prop_convexity(rng, trials)),
        ("ordering", lambda: prop_ordering(rng, trials, light)),
        ("swept curves", lambda: prop_swept_curves(rng, trials, light)),
        ("cardinality", lambda: prop_cardinality(rng, trials, light)),
        ("bounds", lambda: prop_bounds(rng, trials, replace(BOUNDS_CFG, seed=cfg.seed))),
    ]
    results = [(name, *fn()) for name, fn in suites]
    ok = all(r[1] for r in results)
    detail = ", ".join(f"{name} {'ok' if good else 'FAIL'} ({worst:.1e})" for name, good, worst in results)
    return Check(10, "property suites", ok, detail, f"all pass over {trials} trials each")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}
QUICK = {1: {}, 2: {}, 3: {}, 4: {}, 6: {}, 7: {}, 8: {}, 9: {"instances": 3}}


def run(cfg: SolverConfig | None = None, quick: bool = False, numbers=None, echo=None):
    """Evaluate criteria in order; ``quick`` runs a reduced subset. Returns the checks."""
    cfg = cfg or SolverConfig()
    plan = QUICK if quick else {n: {} for n in CRITERIA}
    if numbers is not None:
        plan = {n: plan.get(n, {}) for n in numbers}
    checks = []
    for n, kwargs in plan.items():
        start = time.perf_counter()
        check = CRITERIA[n](cfg, **kwargs)
        check = replace(check, seconds=time.perf_counter() - start)
        checks.append(check)
        if echo:
            echo(check.line())
    return checks
