import math

import pytest

from edtqueue import validation
from edtqueue.validation import Check, CriterionResult, format_report


def test_check_directions():
    assert Check("a", 0.5, 1.0).passed
    assert not Check("a", 1.5, 1.0).passed
    assert Check("a", 1.5, 1.0, at_least=True).passed
    assert not Check("a", math.nan, 1.0).passed
    assert not Check("a", math.inf, math.inf).passed


def test_informational_checks_never_gate():
    r = CriterionResult("k", "title", (Check("g", 0.0, 1.0), Check("i", 9.0, 1.0, gating=False)),
                        0.1)
    assert r.passed
    lines = r.lines()
    assert lines[0].startswith("PASS k: title")
    assert "[ok]" in lines[1] and "[info]" in lines[2]


def test_report_has_one_verdict_line_per_criterion():
    ok = CriterionResult("a", "x", (Check("c", 0.0, 1.0),), 0.0, ("n",))
    bad = CriterionResult("b", "y", (Check("c", 2.0, 1.0),), 0.0)
    text = format_report([ok, bad])
    verdicts = [ln for ln in text.splitlines() if ln.startswith(("PASS", "FAIL"))]
    assert verdicts == [ok.summary(), bad.summary()]
    assert "[MISS]" in text
    assert text.endswith("1/2 criteria passed")


def test_presets_match_figure_captions():
    p = validation.PRESETS
    assert (p["fig4"]["ttr"], p["fig4"]["lam"], p["fig4"]["mu"]) == (10.0, 3.0, 2.0)
    assert p["fig5"]["ts"] == 0.5
    assert p["fig6"]["ts_list"] == (1.0, 0.5, 0.1, 0.01)
    assert (p["fig7"]["h"], p["fig8"]["h"]) == (100.0, 10.0)
    assert p["fig7"]["snr"] == pytest.approx(10 ** 0.8)
    assert (p["fig9"]["ttr"], p["fig9"]["lam"], p["fig9"]["mu"]) == (3.0, 10.0, 2.0)
    assert min(p["fig9"]["psi"]) > 18.0
    assert p["fig10"]["ts_list"] == (1.0, 0.5, 0.1)


def test_central_region_brackets_the_bulk():
    law = validation.edt_pdf_continuous(10.0, validation.ChannelParams(3.0, 2.0))
    lo, hi = validation.central_region(law)
    assert law.cdf(lo) == pytest.approx(0.05, abs=1e-9)
    assert law.cdf(hi) == pytest.approx(0.95, abs=1e-9)


def test_run_criteria_filters_options():
    (r,) = validation.run_criteria(["mgf"], n_samples=10, seed=1, ts=1e-4)
    assert r.key == "mgf"
    assert r.passed


def test_negative_control_small_run():
    r = validation.check_negative_control(n_samples=200_000, seed=3)
    assert r.passed
