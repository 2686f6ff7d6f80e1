import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sivending.acceptance import bsc_markov_instance, random_instance
from sivending.decoder import InfeasibleError, lossless_rate_decoder
from sivending.encoder import encoder_bounds, encoder_lossless_rate, gaussian_rdc, markov_rdc
from sivending.figures import zs_instance
from sivending.problem import GaussianSpec, ProblemSpec
from sivending.simplex import SolverConfig

FAST = SolverConfig(restarts=1, max_iters=300)
BOUNDS = SolverConfig(restarts=1, max_iters=100, envelope_rounds=6)
HAMMING = 1.0 - np.eye(2)


def hb(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def gaussian_reference(var_x, var_n, d, c):
    gain = (1 + math.sqrt(c / var_x)) ** 2 * var_x + var_n
    return max(0.5 * math.log2(var_x * var_n / (gain * d)), 0.0)


def test_zs_encoder_lossless_unconstrained_is_free():
    assert encoder_lossless_rate(zs_instance(0.5, "encoder-lossless"), 1.0, FAST) == pytest.approx(0.0, abs=1e-6)


def test_zs_encoder_lossless_zero_budget():
    # only the Z channel is affordable, so the action carries nothing
    assert encoder_lossless_rate(zs_instance(0.5, "encoder-lossless"), 0.0, FAST) == pytest.approx(0.688722, abs=1e-6)


def test_single_action_is_slepian_wolf():
    w = np.array([[0.9, 0.1], [0.3, 0.7]])
    px = np.array([0.6, 0.4])
    spec = ProblemSpec(px, w, HAMMING, [0.0], "encoder-lossless")
    joint = px[:, None] * w
    py = joint.sum(axis=0)
    h_x_given_y = -float(np.sum(joint * np.log2(joint / py)))
    assert encoder_lossless_rate(spec, 0.0, FAST) == pytest.approx(h_x_given_y, abs=1e-6)


def test_encoder_actions_never_worse_than_decoder_actions():
    spec = random_instance(np.random.default_rng(21), mode="encoder-lossless")
    c = float(spec.lam.max()) / 2
    enc = encoder_lossless_rate(spec, c, FAST)
    dec = lossless_rate_decoder(spec.with_mode("decoder"), c, FAST)
    assert enc <= dec + 1e-6


def test_encoder_lossless_budget_below_cheapest():
    spec = ProblemSpec([0.5, 0.5], np.full((4, 2), 0.5), HAMMING, [0.2, 1.0], "encoder-lossless")
    with pytest.raises(InfeasibleError):
        encoder_lossless_rate(spec, 0.1)


@pytest.mark.parametrize("var_x, var_n, d, c", [(1, 1, 0.1, 0.0), (1, 1, 0.1, 1.0), (2, 0.5, 0.05, 0.3),
                                                (1, 1, 0.3, 2.0)])
def test_gaussian_examples(var_x, var_n, d, c):
    assert gaussian_rdc(GaussianSpec(var_x, var_n, d, c)) == pytest.approx(
        gaussian_reference(var_x, var_n, d, c), abs=1e-12)


def test_gaussian_no_budget_is_wyner_ziv():
    # with c = 0 the side information is X + N, so R = 1/2 log(var_x var_n / ((var_x + var_n) d))
    assert gaussian_rdc(GaussianSpec(1, 1, 0.1, 0.0)) == pytest.approx(0.5 * math.log2(1 / (2 * 0.1)))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 3.0), st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_gaussian_monotone(d, c, dd, dc):
    r = gaussian_rdc(GaussianSpec(1, 1, d, c))
    assert gaussian_rdc(GaussianSpec(1, 1, d + dd, c)) <= r
    assert gaussian_rdc(GaussianSpec(1, 1, d, c + dc)) <= r


@pytest.mark.parametrize("c", [0.0, 0.5, 1.7])
def test_gaussian_boundary_is_zero(c):
    d0 = 1.0 / ((1 + math.sqrt(c)) ** 2 + 1)
    assert gaussian_rdc(GaussianSpec(1, 1, d0, c)) == 0.0
    assert gaussian_rdc(GaussianSpec(1, 1, 2 * d0, c)) == 0.0


def test_markov_values():
    assert markov_rdc(bsc_markov_instance(0.5), 0.25, 1.0, FAST) == pytest.approx(0.188722, abs=1e-6)
    assert markov_rdc(bsc_markov_instance(0.0), 0.25, 1.0, FAST) == 0.0
    expected = hb(0.11) - hb(0.05)
    assert markov_rdc(bsc_markov_instance(0.11), 0.05, 1.0, FAST) == pytest.approx(expected, abs=1e-6)


def test_markov_rejects_general_kernel():
    with pytest.raises(ValueError, match="Markov"):
        markov_rdc(random_instance(np.random.default_rng(1), mode="encoder-markov"), 0.1, 0.5)


def test_bounds_exact_at_zero_distortion():
    spec = random_instance(np.random.default_rng(4), mode="encoder-bounds")
    c = float(spec.lam.max()) / 2
    r = encoder_bounds(spec, 0.0, c, BOUNDS)
    assert r.certified_exact
    assert r.lower == pytest.approx(encoder_lossless_rate(spec, c, FAST), abs=1e-5)
    assert r.lower - 1e-9 <= r.upper_closed_switch <= r.upper_open_switch + 1e-9
    assert r.upper_open_switch - r.lower <= 2e-3


def test_bounds_exact_for_markov_kernel():
    spec = bsc_markov_instance(0.2)
    r = encoder_bounds(spec, 0.1, 0.5, BOUNDS)
    assert r.certified_exact
    assert r.lower == pytest.approx(markov_rdc(spec, 0.1, 0.5, FAST), abs=1e-5)
    assert r.upper_open_switch - r.lower <= 2e-3


@pytest.mark.parametrize("seed", [31, 32])
def test_bounds_are_ordered(seed):
    spec = random_instance(np.random.default_rng(seed), mode="encoder-bounds")
    r = encoder_bounds(spec, 0.1, float(spec.lam.max()) / 2, BOUNDS)
    assert 0.0 <= r.lower <= r.upper_closed_switch + 1e-9
    assert r.upper_closed_switch <= r.upper_open_switch + 1e-9
    assert r.aux_size > 0


def test_bounds_reject_unreachable_distortion():
    spec = ProblemSpec([0.5, 0.5], np.full((4, 2), 0.5), 0.2 + 0.8 * HAMMING, [0.0, 1.0], "encoder-bounds")
    with pytest.raises(InfeasibleError):
        encoder_bounds(spec, 0.1, 0.5)
