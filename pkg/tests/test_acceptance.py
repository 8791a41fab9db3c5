"""Acceptance gate: one test per criterion, each printing its pass/fail line."""
import pytest

from lipcap.acceptance import CRITERIA, run_criterion


IDS = [f"{n:02d}-" + name.replace(" ", "-").replace("=", "").replace("--", "-") for n, name, _ in CRITERIA]


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=IDS)
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    assert result.passed, result.detail
