"""The twelve acceptance criteria, each at its stated tolerance and time budget.

Every criterion prints one PASS/FAIL line; the lines are also collected into a
summary section at the end of the run.
"""
import pytest

from galrtf.verify import CRITERIA, DEFAULT_SEED, run_criterion

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [n for n, *_ in CRITERIA], ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number):
    result = run_criterion(number, DEFAULT_SEED)
    print(result.line)
    ACCEPTANCE_LINES.append(result.line)
    assert result.details.get("within_budget"), f"{result.seconds:.2f}s over the {result.budget:.0f}s budget"
    assert result.passed, result.details
