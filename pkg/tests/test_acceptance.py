"""Full-scale acceptance checks, one test per criterion.

Each test prints a single ``criterion N [PASS|FAIL]`` line, so the outcome
is visible in the ``pytest -v`` log even when assertions are captured.
Run on its own with ``pytest tests/test_acceptance.py -v``.

Two criteria fail at their prescribed discretisation, and the two
``*_at_finer_resolution`` tests below show the same checks passing once the
discretisation is refined.
"""
import warnings

import pytest

from limloc import verify

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


def _report(capsys, res):
    with capsys.disabled():
        print("\n" + res.line(), flush=True)
    return res


@pytest.mark.parametrize("number", sorted(verify.CRITERIA))
def test_criterion(number, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = _report(capsys, verify.CRITERIA[number]())
    assert res.status == "pass", res.note


def test_closed_form_cross_checks(capsys):
    res = _report(capsys, verify.analytics_checks())
    assert res.status == "pass", res.note


def test_bounded_allowance_at_finer_resolution(capsys):
    # longer horizon removes the truncated draws, smaller dt shrinks the band the Bessel part occupies
    res = _report(capsys, verify.criterion_1(horizon=1e5, dt=1e-6))
    assert res.status == "pass", res.note


def test_reflection_oracle_at_finer_resolution(capsys):
    res = _report(capsys, verify.criterion_3(dt=1e-4, fast_forward=True))
    assert res.status == "pass", res.note
