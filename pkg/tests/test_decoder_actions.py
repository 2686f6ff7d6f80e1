import math

import numpy as np
import pytest

from sivending.acceptance import random_instance, ternary_instance
from sivending.classic import erased_si_wz, rd_function
from sivending.decoder import (
    InfeasibleError,
    greedy_rate,
    lossless_rate_decoder,
    rdc_causal,
    rdc_decoder,
    rdc_independent,
    rdc_indirect,
    timeshare_bound,
)
from sivending.documents import bundled
from sivending.figures import zs_instance
from sivending.problem import ProblemSpec
from sivending.simplex import SolverConfig

FAST = SolverConfig(restarts=1, max_iters=300)
HAMMING = 1.0 - np.eye(2)


def hb(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def zs_scan(delta, n=20_000):
    a = np.linspace(0.0, 1.0, n + 1)
    s = 1 - a + a * delta
    vals = [1 - hb(x) + hb(x * delta / t) * t for x, t in zip(a, s)]
    return min(vals)


def zs_greedy(delta):
    return hb(delta / (1 + delta)) * (1 + delta) / 2


@pytest.mark.parametrize("delta", [0.25, 0.5, 0.75])
def test_zs_lossless_matches_scan(delta):
    assert lossless_rate_decoder(zs_instance(delta), 1.0, FAST) == pytest.approx(zs_scan(delta), abs=1e-6)


def test_zs_lossless_value():
    assert lossless_rate_decoder(zs_instance(0.5), 1.0, FAST) == pytest.approx(0.678072, abs=1e-5)


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.5, 1.0])
def test_greedy_closed_form(delta):
    assert greedy_rate(zs_instance(delta), 0.0, FAST) == pytest.approx(zs_greedy(delta), abs=1e-9)


def test_greedy_extremes():
    assert greedy_rate(zs_instance(0.0), 0.0) == pytest.approx(0.0, abs=1e-12)
    assert greedy_rate(zs_instance(1.0), 0.0) == pytest.approx(1.0, abs=1e-12)


def test_zero_budget_is_greedy_on_free_action():
    # only the Z channel is free, and here it is also the greedy choice
    assert lossless_rate_decoder(zs_instance(0.5), 0.0, FAST) == pytest.approx(0.688722, abs=1e-6)


def test_ternary_lossless_and_lossy():
    spec = ternary_instance()
    assert rdc_decoder(spec, 0.0, 0.5, FAST) == pytest.approx(1.0, abs=1e-3)
    assert rdc_decoder(spec, 0.1, 0.5, FAST) == pytest.approx(1 - hb(0.1), abs=2e-3)


def test_observe_or_not_matches_erasure_formula():
    spec = bundled("observe_or_not_identity").spec
    d, c = 0.1, 0.3
    expected = (1 - c) * (1 - hb(d / (1 - c)))
    assert expected == pytest.approx(erased_si_wz(0.5, 1 - c, d))
    assert rdc_decoder(spec, d, c, FAST) == pytest.approx(expected, abs=1e-6)
    assert rdc_independent(spec, d, c, FAST) == pytest.approx(expected, abs=1e-6)


def test_indirect_with_clean_observation_equals_decoder():
    spec = random_instance(np.random.default_rng(3))
    w = spec.w.reshape(spec.n_x, spec.n_actions, spec.n_y)
    pyz = np.zeros((spec.n_x, spec.n_x, spec.n_actions, spec.n_y))
    for x in range(spec.n_x):
        pyz[x, :] = w[x]
    indirect = ProblemSpec(spec.px.mass, None, spec.rho.values, spec.lam, "indirect",
                           p_z_given_x=np.eye(spec.n_x), p_y_given_xza=pyz.reshape(-1, spec.n_y))
    d, c = 0.1, float(spec.lam.max()) / 2
    assert rdc_indirect(indirect, d, c, FAST) == pytest.approx(rdc_decoder(spec, d, c, FAST), abs=1e-5)


def test_causal_with_useless_side_information_is_rd():
    w = np.full((4, 2), 0.5)
    spec = ProblemSpec([0.3, 0.7], w, HAMMING, [0.0, 1.0], "causal")
    for d in (0.05, 0.15):
        assert rdc_causal(spec, d, 0.5, FAST) == pytest.approx(rd_function([0.3, 0.7], HAMMING, d), abs=1e-5)


def test_causal_never_beats_noncausal():
    spec = random_instance(np.random.default_rng(5))
    causal = ProblemSpec(spec.px.mass, spec.w.reshape(-1, spec.n_y), spec.rho.values, spec.lam, "causal")
    d, c = 0.1, float(spec.lam.max())
    assert rdc_causal(causal, d, c, FAST) >= rdc_decoder(spec, d, c, FAST) - 1e-6


@pytest.mark.parametrize("seed", [11, 12])
def test_ordering_of_policies(seed):
    rng = np.random.default_rng(seed)
    spec = random_instance(rng)
    d, c = 0.1, float(spec.lam.max()) / 2
    adaptive = rdc_decoder(spec, d, c, FAST)
    independent = rdc_independent(spec, d, c, FAST)
    shared = timeshare_bound(spec, d, c, FAST)
    assert adaptive <= independent + 1e-6
    assert independent == pytest.approx(shared, abs=1e-4)


def test_lossless_path_matches_zero_distortion():
    spec = random_instance(np.random.default_rng(8))
    c = float(spec.lam.max()) / 2
    assert lossless_rate_decoder(spec, c, FAST) == pytest.approx(rdc_decoder(spec, 0.0, c, FAST), abs=1e-5)


def test_budget_below_cheapest_action_is_infeasible():
    spec = ProblemSpec([0.5, 0.5], np.full((4, 2), 0.5), HAMMING, [0.2, 1.0])
    with pytest.raises(InfeasibleError):
        rdc_decoder(spec, 0.1, 0.1, FAST)


def test_mode_is_checked():
    with pytest.raises(ValueError, match="mode"):
        rdc_causal(zs_instance(0.5), 0.1, 0.5)
