import json
import math

import numpy as np
import pytest

from expdyn.classify import (BOUNDED_AWAY, DERIVATIVE_TO_ZERO, INDETERMINATE,
                             SUBSEQ_TO_INFINITY, Thresholds, assign_case, classify_lambda,
                             expansion_diagnostic, prop1_evidence, prop1_scan, w_evidence)
from expdyn.errors import InsufficientSamples


@pytest.fixture(scope="module")
def omega():
    import mpmath
    return float(mpmath.lambertw(1))


@pytest.mark.parametrize("horizon", [100, 200])
def test_anchor_cases(horizon):
    assert classify_lambda(-1, horizon).case == DERIVATIVE_TO_ZERO
    assert classify_lambda(1, horizon).case == SUBSEQ_TO_INFINITY
    assert classify_lambda(0.2, horizon).case == DERIVATIVE_TO_ZERO


def test_lambda_minus_one(omega):
    r = classify_lambda(-1, 200)
    assert r.period == 1
    assert abs(r.cycle_multiplier) == pytest.approx(omega, abs=1e-9)
    assert r.ratio_last == pytest.approx(omega, abs=1e-6)
    assert r.thm1_flags["h3_ratio_bounded"].value is True
    assert r.w_evidence.summable == "diverging"


def test_lambda_one():
    r = classify_lambda(1, 200)
    assert r.escaped
    assert r.sn_trend[-1].real == pytest.approx(2.3921551, abs=1e-7)
    assert r.thm1_flags["h1"].value is True
    assert r.w_evidence.summable == "absolutely-convergent"
    assert r.w_evidence.min_dist_to_zero == 1.0


def test_lambda_point_two():
    r = classify_lambda(0.2, 200)
    assert abs(r.cycle_multiplier) == pytest.approx(0.2592, abs=1e-4)


def test_flags_carry_horizon():
    for lam in (-1, 1, 0.2, 2j, -2.72):
        r = classify_lambda(lam, 120)
        for f in r.thm1_flags.values():
            assert f.horizon == 120
        assert r.w_evidence.zero_not_in_X.horizon == 120


def test_decreasing_window_invariant():
    for lam in (-1, 0.2, 0.5j, -0.3 + 0.4j):
        r = classify_lambda(lam, 200)
        if r.case != DERIVATIVE_TO_ZERO:
            continue
        L = r.derivative_trend
        w = max(4, math.ceil(0.25 * len(L)))
        p = r.period or 1
        sampled = L[len(L) - 1 - p * np.arange(max(3, math.ceil(w / p)))[::-1]]
        assert np.count_nonzero(np.diff(sampled) >= 0) <= len(sampled) // 50


def test_deterministic_report():
    for lam in (-1, 1, 0.3 + 0.2j):
        assert classify_lambda(lam, 150).dumps() == classify_lambda(lam, 150).dumps()
    js = json.loads(classify_lambda(1, 50).dumps())
    assert js["case"] == SUBSEQ_TO_INFINITY and "normalization" in js


def test_horizon_precondition():
    with pytest.raises(ValueError):
        classify_lambda(1, 10)
    with pytest.raises(ValueError):
        w_evidence(1, 10)


def test_assign_case_synthetic():
    th = Thresholds()
    assert assign_case(-0.5 * np.arange(100), False) == DERIVATIVE_TO_ZERO
    assert assign_case([0.0] * 100, True) == SUBSEQ_TO_INFINITY
    assert assign_case(np.sin(np.arange(100)) * 0.5, False, 1, th) == BOUNDED_AWAY
    assert assign_case([0, 1, 2], False) == INDETERMINATE
    rising = np.concatenate([np.zeros(75), np.linspace(0, 30, 25)])
    assert assign_case(rising, False) == SUBSEQ_TO_INFINITY


def test_w_evidence_examples():
    assert w_evidence(1, 50).summable == "absolutely-convergent"
    assert w_evidence(-1, 200).summable == "diverging"
    for lam in (1, -1, 0.3j, 2 - 1j):
        w = w_evidence(lam, 30)
        assert w.min_dist_to_zero <= 1.0
        assert w.separation == w.measure_zero == "not numerically decidable"


def test_prop1_anchor_points():
    assert not prop1_evidence(-1).flagged
    e = prop1_evidence(1)
    assert not e.flagged and e.escaped


def test_prop1_scan_real_grid_empty():
    grid = np.round(np.arange(-300, 301) * 0.01, 10)
    res = prop1_scan(grid, 200)
    assert res.flags == []
    assert len(res.evidence) == 601
    assert all(e.band_log == pytest.approx(2 * math.log1p(0.02)) for e in res.near_misses())
    with pytest.raises(ValueError):
        prop1_scan([], 200)


def test_expansion_diagnostic():
    rep = expansion_diagnostic(1, 3, 4)
    assert np.all(rep.logmods[:, 0] == 0)
    assert np.all(np.diff(rep.min_logmod) > 0)
    rep = expansion_diagnostic(-1, 10, 5)
    assert np.all(np.diff(rep.min_logmod) < 0)
    with pytest.raises(InsufficientSamples):
        expansion_diagnostic(1, 3, 50)
