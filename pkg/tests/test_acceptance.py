"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import pytest

from isoperimetrix.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.details
