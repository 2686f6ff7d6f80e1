import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sivending.classic import (
    ChannelSpec,
    capacity_with_cost,
    erased_si_wz,
    rd_bracket,
    rd_function,
    slepian_wolf_rate,
    wyner_ziv_rate,
)
from sivending.info import JointDist

HAMMING = 1.0 - np.eye(2)


def hb(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def erasure_joint(p, e):
    """X ~ Bern(p), Y in {0, 1, ?} erases X with probability e."""
    px = np.array([1 - p, p])
    k = np.array([[1 - e, 0.0, e], [0.0, 1 - e, e]])
    return JointDist(px[:, None] * k, ("X", "Y"))


@pytest.mark.parametrize("p, d", [(0.5, 0.25), (0.5, 0.1), (0.3, 0.05), (0.2, 0.15)])
def test_binary_rd_matches_closed_form(p, d):
    assert rd_function([1 - p, p], HAMMING, d) == pytest.approx(hb(p) - hb(d), abs=1e-6)


def test_fair_bit_at_quarter_distortion():
    assert rd_function([0.5, 0.5], HAMMING, 0.25) == pytest.approx(0.188722, abs=1e-6)


def test_zero_distortion_gives_entropy():
    px = np.array([0.2, 0.3, 0.5])
    h = -float(px @ np.log2(px))
    assert rd_function(px, 1.0 - np.eye(3), 0.0) == pytest.approx(h, abs=1e-6)


def test_rd_zero_beyond_useful_distortion():
    assert rd_function([0.5, 0.5], HAMMING, 0.5) == 0.0


def test_rd_bracket_is_ordered():
    lo, hi = rd_bracket([0.4, 0.6], HAMMING, 0.1)
    assert lo <= hi + 1e-12 and hi - lo < 1e-6


def test_rd_rejects_negative_distortion():
    with pytest.raises(ValueError):
        rd_function([0.5, 0.5], HAMMING, -0.1)


@pytest.mark.parametrize("eps, expected", [(0.5, 0.0), (0.0, 1.0), (0.11, 1.0 - hb(0.11))])
def test_bsc_capacity(eps, expected):
    ch = ChannelSpec([[1 - eps, eps], [eps, 1 - eps]], [0.0, 0.0])
    assert capacity_with_cost(ch, 0.0) == pytest.approx(expected, abs=1e-6)


def test_cost_limits_noiseless_capacity():
    # noiseless bit where sending 1 costs 1: capacity h(min(c, 1/2))
    ch = ChannelSpec(np.eye(2), [0.0, 1.0])
    for c in (0.1, 0.3, 0.8):
        assert capacity_with_cost(ch, c) == pytest.approx(hb(min(c, 0.5)), abs=1e-6)


def test_capacity_below_cheapest_input_raises():
    with pytest.raises(ValueError):
        capacity_with_cost(ChannelSpec(np.eye(2), [0.5, 1.0]), 0.1)


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(np.eye(2), [0.0, 1.0, 2.0])


def test_slepian_wolf_examples():
    assert slepian_wolf_rate([0.5, 0.5], np.eye(2)) == pytest.approx(0.0)
    assert slepian_wolf_rate([0.5, 0.5], np.full((2, 2), 0.5)) == pytest.approx(1.0)
    bsc = [[0.89, 0.11], [0.11, 0.89]]
    assert slepian_wolf_rate([0.5, 0.5], bsc) == pytest.approx(hb(0.11))
    # erasure side information leaves X unknown only when erased
    assert slepian_wolf_rate([0.5, 0.5], [[0.7, 0.0, 0.3], [0.0, 0.7, 0.3]]) == pytest.approx(0.3)


def test_slepian_wolf_shape_mismatch():
    with pytest.raises(ValueError):
        slepian_wolf_rate([0.5, 0.5], np.eye(3))


@pytest.mark.parametrize("d, expected", [(0.25, 0.0), (0.125, 0.094361)])
def test_wyner_ziv_erased_side_information(d, expected):
    assert wyner_ziv_rate(erasure_joint(0.5, 0.5), 1.0 - np.eye(2, 3), d) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize("p, e, d", [(0.5, 0.5, 0.1), (0.3, 0.6, 0.05), (0.2, 0.9, 0.12)])
def test_wyner_ziv_solver_agrees_with_erasure_formula(p, e, d):
    rate = wyner_ziv_rate(erasure_joint(p, e), 1.0 - np.eye(2, 3), d)
    assert rate == pytest.approx(erased_si_wz(p, e, d), abs=1e-5)


def test_erased_si_wz_examples():
    assert erased_si_wz(0.5, 0.5, 0.25) == 0.0
    assert erased_si_wz(0.5, 0.5, 0.125) == pytest.approx(0.5 * (1 - hb(0.25)))
    assert erased_si_wz(0.5, 0.0, 0.1) == 0.0
    assert erased_si_wz(0.5, 1.0, 0.1) == pytest.approx(1 - hb(0.1))
    with pytest.raises(ValueError):
        erased_si_wz(1.5, 0.5, 0.1)


def test_wyner_ziv_joint_parameterization_agrees():
    pxy = JointDist(np.array([[0.4, 0.1], [0.15, 0.35]]), ("X", "Y"))
    labels = wyner_ziv_rate(pxy, HAMMING, 0.1)
    joint = wyner_ziv_rate(pxy, HAMMING, 0.1, parameterization="joint")
    assert joint >= labels - 1e-6
    assert joint == pytest.approx(labels, abs=1e-3)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.0, 0.45), st.floats(0.0, 0.3))
def test_wyner_ziv_between_zero_and_slepian_wolf(p, eps, d):
    px = np.array([1 - p, p])
    k = np.array([[1 - eps, eps], [eps, 1 - eps]])
    rate = wyner_ziv_rate(JointDist(px[:, None] * k, ("X", "Y")), HAMMING, d)
    assert -1e-9 <= rate <= slepian_wolf_rate(px, k) + 1e-6
    assert rate <= rd_function(px, HAMMING, d) + 1e-6
