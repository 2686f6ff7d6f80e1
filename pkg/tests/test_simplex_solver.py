import itertools
import math

import numpy as np
import pytest

from sivending.acceptance import random_instance, ternary_instance
from sivending.classic import wyner_ziv_rate
from sivending.documents import bundled
from sivending.figures import zs_instance
from sivending.info import JointDist, factorize
from sivending.oracle import grid_oracle, simplex_grid
from sivending.problem import ProblemSpec
from sivending.simplex import (
    LagrangeWeights,
    SolverConfig,
    make_functional,
    minimize_lagrangian,
    sweep_functional,
    sweep_tradeoff,
)

FAST = SolverConfig(restarts=1, max_iters=300)


def hb(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def zs_scan(delta=0.5, n=10_000):
    """Closed-form symmetric lossless objective minimised on a uniform alpha grid."""
    best = (math.inf, None)
    for i in range(n + 1):
        a = i / n
        s = 1 - a + a * delta
        best = min(best, (1 - hb(a) + hb(a * delta / s) * s, a))
    return best


def test_zs_lossless_lagrangian():
    point = minimize_lagrangian("lossless", zs_instance(0.5), LagrangeWeights())
    k = point.p_au_given_x.rows
    alpha = 0.5 * (k[0, 1] + k[1, 0])
    assert abs(alpha - 0.4) < 1e-3
    assert abs(point.lagrangian - 0.678072) < 1e-4
    assert point.decoder is None


def test_zs_lossless_matches_one_dimensional_scan():
    value, alpha = zs_scan()
    assert abs(alpha - 0.4) < 1e-3
    point = minimize_lagrangian("lossless", zs_instance(0.5), LagrangeWeights())
    assert abs(point.lagrangian - value) < 1e-6
    oracle = grid_oracle("lossless", zs_instance(0.5), LagrangeWeights(), resolution=200)
    assert abs(oracle.lagrangian - value) < 1e-6


def test_unconstrained_decoder_rate_is_zero():
    point = minimize_lagrangian("decoder", zs_instance(0.5), LagrangeWeights(0.0, 0.0))
    assert point.lagrangian < 1e-6 and point.rate < 1e-6


def test_random_instance_matches_oracle():
    rng = np.random.default_rng(7)
    spec = random_instance(rng)
    w = LagrangeWeights(1.5, 0.4)
    got = minimize_lagrangian("decoder", spec, w).lagrangian
    ref = grid_oracle("decoder", spec, w, resolution=8, n_aux=3).lagrangian
    assert got <= ref + 2e-3
    assert abs(got - ref) < 2e-3


def test_single_action_oracle_reduces_to_wyner_ziv():
    px = np.array([0.4, 0.6])
    w = np.array([[0.85, 0.15], [0.2, 0.8]])
    spec = ProblemSpec(px, w, 1.0 - np.eye(2), [0.0], "decoder")
    d = 0.1
    ref = grid_oracle("decoder", spec, LagrangeWeights(), resolution=40, n_aux=3,
                      constraint=(d, None)).rate
    wz = wyner_ziv_rate(JointDist(px[:, None] * w, ("X", "Y")), 1.0 - np.eye(2), d)
    # grid points are achievable, so the oracle never beats the optimum
    assert wz - 1e-9 <= ref < wz + 1e-2


def test_ternary_oracle_at_half_cost():
    point = grid_oracle("lossless", ternary_instance(), LagrangeWeights(), resolution=6,
                        constraint=(None, 0.5))
    assert abs(point.rate - 1.0) < 1e-3
    assert point.cost <= 0.5 + 1e-12


def test_oracle_refuses_oversized_grid():
    with pytest.raises(ValueError, match="budget"):
        grid_oracle("decoder", random_instance(np.random.default_rng(0)), LagrangeWeights(),
                    resolution=30, n_aux=4)


def test_simplex_grid_points():
    g = simplex_grid(3, 4)
    assert g.shape == (math.comb(6, 2), 3)
    np.testing.assert_allclose(g.sum(axis=1), 1.0)
    assert len({tuple(r) for r in g}) == g.shape[0]


def test_decoder_table_is_optimal_for_its_kernel():
    spec = random_instance(np.random.default_rng(11))
    point = minimize_lagrangian("decoder", spec, LagrangeWeights(2.0, 0.3), parameterization="joint", n_aux=2)
    g = point.decoder
    n_u, n_y = g.shape
    j = factorize(spec.px, point.p_au_given_x, spec.w.reshape(-1, n_y)).tensor  # (x, a, u, y)
    rho = spec.rho.values

    def distortion(table):
        return sum(j[x, a, u, y] * rho[x, table[u][y]]
                   for x, a, u, y in itertools.product(*map(range, j.shape)))

    best = distortion(g)
    assert abs(best - point.distortion) < 1e-9
    for flat in itertools.product(range(spec.n_xhat), repeat=n_u * n_y):
        assert distortion(np.reshape(flat, (n_u, n_y))) >= best - 1e-12


def test_labels_and_joint_forms_agree():
    spec = random_instance(np.random.default_rng(5))
    w = LagrangeWeights(1.2, 0.5)
    labels = minimize_lagrangian("decoder", spec, w).lagrangian
    joint = minimize_lagrangian("decoder", spec, w, parameterization="joint").lagrangian
    assert abs(labels - joint) < 2e-3


def test_determinism():
    spec = random_instance(np.random.default_rng(9))
    cfg = SolverConfig(seed=3, restarts=2)
    w = LagrangeWeights(1.0, 0.2)
    a = minimize_lagrangian("decoder", spec, w, cfg, "joint")
    b = minimize_lagrangian("decoder", spec, w, cfg, "joint")
    assert a.lagrangian == b.lagrangian
    assert np.array_equal(a.p_au_given_x.rows, b.p_au_given_x.rows)


def test_erasure_sweep_endpoints_and_monotone():
    spec = bundled("observe_or_not_erasure").spec
    costs = [0.0, 0.5, 1.0]
    curve = sweep_functional(make_functional("decoder", spec), [0.25], costs, FAST, seed_sweep=False)
    rates = [r[2] for r in curve.rows]
    assert abs(rates[0] - 0.188722) < 1e-5
    assert rates[2] < 1e-5
    assert rates[0] >= rates[1] >= rates[2]


def test_infeasible_point_is_flagged():
    spec = bundled("ternary").spec
    curve = sweep_functional(make_functional("decoder", spec), [0.1], [0.0], FAST, seed_sweep=False)
    # only the erasing action is affordable, so the rate stays positive
    d, c, rate, lower, ok = curve.rows[0]
    assert ok and rate > 0
    curve = sweep_functional(make_functional("lossless", zs_instance(0.0)), [0.0], [0.0, 1.0], FAST,
                             seed_sweep=False)
    assert all(row[4] for row in curve.rows)


def test_distortion_below_minimum_is_infeasible():
    spec = ProblemSpec([0.5, 0.5], np.full((4, 2), 0.5), 0.2 + 0.8 * (1.0 - np.eye(2)), [0.0, 1.0])
    curve = sweep_functional(make_functional("decoder", spec), [0.1, 0.3], [1.0], FAST, seed_sweep=False)
    assert not curve.rows[0][4] and curve.rows[0][2] == math.inf
    assert curve.rows[1][4]


@pytest.mark.parametrize("kwargs", [dict(max_iters=0), dict(restarts=0), dict(grid_resolution=1),
                                    dict(objective_tol=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_weights_validation():
    with pytest.raises(ValueError):
        LagrangeWeights(-1.0, 0.0)
    with pytest.raises(ValueError):
        LagrangeWeights(0.0, math.inf)


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        sweep_tradeoff("decoder", zs_instance(0.5), [0.2, 0.1], [0.0])
