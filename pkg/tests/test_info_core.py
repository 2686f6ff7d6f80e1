import math

import numpy as np
import pytest

from sivending.figures import zs_instance
from sivending.info import (
    JointDist,
    ProbVector,
    ShapeError,
    StochasticKernel,
    bernoulli_rd,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    factorize,
    mutual_information,
)


def hb(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_factorize_deterministic_chain():
    q = np.array([[1.0, 0.0], [0.0, 1.0]])  # (a, u) = (x, x) with |U| = 1
    w = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], float)
    j = factorize([0.5, 0.5], q, w)
    assert j.axis_labels == ("X", "A", "U", "Y")
    assert np.count_nonzero(j.tensor) == 2
    assert j.tensor[0, 0, 0, 0] == 0.5 and j.tensor[1, 1, 0, 1] == 0.5


def test_factorize_preserves_source_marginal():
    rng = np.random.default_rng(1)
    px = rng.dirichlet(np.ones(3))
    j = factorize(px, rng.dirichlet(np.ones(4), 3), rng.dirichlet(np.ones(2), 6))
    np.testing.assert_allclose(j.marginal(["X"]), px, atol=1e-15)
    assert abs(j.tensor.sum() - 1) < 1e-12


def test_factorize_zs_objective():
    alpha = 0.4
    spec = zs_instance(0.5)
    q = np.array([[1 - alpha, alpha], [alpha, 1 - alpha]])
    j = factorize([0.5, 0.5], q, spec.w.reshape(4, 2))
    value = mutual_information(j, "X", "A") + conditional_entropy(j, "X", ["Y", "A"])
    assert abs(value - 0.678072) < 1e-6


def test_factorize_shape_errors_name_axis():
    with pytest.raises(ShapeError) as err:
        factorize([0.5, 0.5], np.ones((3, 2)) / 2, np.ones((4, 2)) / 2)
    assert err.value.axis == "X"
    with pytest.raises(ShapeError) as err:
        factorize([0.5, 0.5], np.ones((2, 3)) / 3, np.ones((4, 2)) / 2)
    assert err.value.axis == "U"
    with pytest.raises(ShapeError) as err:
        factorize([0.5, 0.5], np.ones((2, 2)) / 2, np.ones((3, 2)) / 2)
    assert err.value.axis == "A"


@pytest.mark.parametrize("p, expected", [((1.0, 0.0), 0.0), ((0.5, 0.5), 1.0),
                                          ((0.25, 0.75), hb(0.25))])
def test_entropy_values(p, expected):
    assert abs(entropy(p) - expected) < 1e-12


def test_entropy_value_of_quarter():
    assert abs(entropy([0.25, 0.75]) - 0.811278) < 1e-6


def test_mutual_information_examples():
    indep = JointDist(np.outer([0.3, 0.7], [0.6, 0.4]), ("X", "Y"))
    assert mutual_information(indep, "X", "Y") < 1e-15
    copy = JointDist(np.diag([0.5, 0.5]), ("X", "Y"))
    assert abs(mutual_information(copy, "X", "Y") - 1.0) < 1e-12
    z = JointDist(np.array([[0.5, 0.0], [0.25, 0.25]]), ("X", "Y"))
    assert abs(mutual_information(z, "X", "Y") - (hb(0.25) - 0.5)) < 1e-12
    assert abs(mutual_information(z, "X", "Y") - 0.3112781) < 1e-7


def test_mutual_information_is_symmetric():
    rng = np.random.default_rng(2)
    j = JointDist(rng.dirichlet(np.ones(12)).reshape(3, 4), ("X", "Y"))
    assert abs(mutual_information(j, "X", "Y") - mutual_information(j, "Y", "X")) < 1e-12


def test_overlapping_axes_rejected():
    j = JointDist(np.full((2, 2, 2), 1 / 8), ("X", "Y", "Z"))
    with pytest.raises(ValueError):
        mutual_information(j, ["X", "Y"], "Y")
    with pytest.raises(ValueError):
        conditional_mutual_information(j, "X", "Y", ["X"])


def test_conditional_mi_reductions():
    rng = np.random.default_rng(3)
    t = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
    j = JointDist(t, ("X", "Y", "Z"))
    assert conditional_mutual_information(j, "X", "Y") == mutual_information(j, "X", "Y")
    u_indep = JointDist(np.einsum("xy,u->xyu", t.sum(axis=2), [0.3, 0.7]), ("X", "Y", "U"))
    assert conditional_mutual_information(u_indep, "U", "X", "Y") < 1e-12


def test_chain_rule_identity_on_random_joint():
    rng = np.random.default_rng(4)
    j = factorize(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(4), 2), rng.dirichlet(np.ones(2), 4))
    lhs = mutual_information(j, "X", "A") + conditional_mutual_information(j, "X", "U", ["Y", "A"])
    rhs = (mutual_information(j, "X", ["U", "Y", "A"]) + conditional_entropy(j, "Y", ["A", "X"])
           - conditional_entropy(j, "Y", "A"))
    assert abs(lhs - rhs) < 1e-9


def test_binary_entropy_and_bernoulli_rd():
    assert abs(binary_entropy(0.4) - hb(0.4)) < 1e-15
    assert abs(binary_entropy(0.4) - 0.970950) < 1e-6
    assert abs(bernoulli_rd(0.5, 0.25) - 0.188722) < 1e-6
    assert bernoulli_rd(0.5, 0.5) == 0.0
    assert bernoulli_rd(0.1, 0.3) == 0.0  # positive part, never negative
    with pytest.raises(ValueError):
        bernoulli_rd(1.5, 0.1)
    with pytest.raises(ValueError):
        binary_entropy(-0.1)


def test_containers_validate():
    with pytest.raises(ValueError):
        ProbVector([0.5, 0.6])
    with pytest.raises(ValueError):
        StochasticKernel([[0.5, 0.6]])
    v = ProbVector([0.25, 0.75])
    with pytest.raises(ValueError):
        v.mass[0] = 1.0
