"""The twelve acceptance criteria at their stated tolerances and time budgets.

Run with `pytest -s tests/test_acceptance.py` to see one status line each.
"""

import pytest

from thinfilm import acceptance


@pytest.mark.parametrize("check", acceptance.CRITERIA, ids=lambda c: f"{c.number:02d}-{c.__name__}")
def test_criterion(check):
    result = check(seed=0)
    print(result.line())
    assert result.passed, result.line()


def test_all_twelve_registered():
    assert [c.number for c in acceptance.CRITERIA] == list(range(1, 13))
