"""Acceptance criteria at their stated tolerances, one test and one report line each."""

import pytest

from sivending.acceptance import CRITERIA, run
from sivending.simplex import SolverConfig


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    (check,) = run(SolverConfig(), numbers=[number])
    with capsys.disabled():
        print("\n" + check.line())
    assert check.passed, check.line()
