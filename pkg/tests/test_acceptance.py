"""Acceptance criteria, one test each; every result line is printed (run with -s)."""
import pytest

from seplab.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: f"criterion_{c.number:02d}")
def test_criterion(criterion):
    result = run_criterion(criterion)
    print(result.line())
    assert result.passed, result.detail
