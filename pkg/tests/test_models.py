# tests/test_models.py

import math

import pytest
from pydantic import ValidationError

from checks.models import CheckResult, Report, RunConfig
from checks.suites import CHECKS, SuiteContext, select_checks


@pytest.mark.parametrize("field,value", [("tol", 0.0), ("level", 0), ("grid", 3), ("m_cap", 0), ("sigma", -1.0), ("seed", -1)])
def test_run_config_rejects_bad_values(field, value):
    with pytest.raises(ValidationError):
        RunConfig(command="wave", **{field: value})


def test_run_config_rejects_unknown_command():
    with pytest.raises(ValidationError):
        RunConfig(command="heat")


def test_check_result_comparisons():
    assert CheckResult(name="a", formula="f", value=1e-9, tolerance=1e-8).passed
    assert not CheckResult(name="a", formula="f", value=1e-7, tolerance=1e-8).passed
    assert CheckResult(name="rate", formula="f", value=1.02, tolerance=0.9, at_least=True).passed
    assert not CheckResult(name="nan", formula="f", value=math.nan, tolerance=1.0).passed


def test_report_passes_only_when_every_check_passes():
    good = CheckResult(name="a", formula="f", value=0.0, tolerance=1.0)
    bad = CheckResult(name="b", formula="f", value=2.0, tolerance=1.0)
    report = Report(command="verify", formula="acceptance-suite", seed=1, checks=[good, bad])
    assert not report.passed
    assert [c.name for c in report.failures()] == ["b"]
    assert report.model_dump()["passed"] is False
    assert Report(command="rule", formula="ball-rule", seed=1).passed


def test_select_checks_quick_skips_slow():
    quick = select_checks(quick=True)
    assert all(not c.slow for c in quick)
    assert len(select_checks()) == len(CHECKS)


def test_select_checks_unknown_name():
    with pytest.raises(KeyError):
        select_checks(["sphere-area", "no-such-check"])


@pytest.mark.parametrize("name", ["scalar-ascent-2d", "scalar-ascent-3d", "sphere-area", "transmutation", "taylor-limit", "cos-exp-rewrite"])
def test_fast_checks_pass(name):
    results = CHECKS[name].run(SuiteContext(seed=1729))
    assert results
    assert all(r.passed for r in results), [r for r in results if not r.passed]


@pytest.mark.slow
def test_full_suite_passes():
    ctx = SuiteContext(seed=1729, mc_samples=200_000)
    for check in select_checks():
        results = check.run(ctx)
        assert all(r.passed for r in results), (check.name, [r for r in results if not r.passed])
