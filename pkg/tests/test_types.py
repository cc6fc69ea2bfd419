from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from core.errors import (
    BadCountsError,
    BadGridError,
    BadPercentileError,
    DoubleRankError,
    EmptySetError,
    InvalidSpecError,
    NegativeCountError,
    NonMonotoneError,
)
from core.indicators import indicator_set
from core.types import (
    CitationSet,
    CssResult,
    FitMethod,
    LognormalSpec,
    PercentileSeries,
    PowerLawFit,
    validate_citation_set,
)


def test_validate_citation_set_accepts_minimal_input():
    cset = validate_citation_set([0, 3, 7], "s1")
    assert cset.size == 3
    assert cset.label == "s1"
    assert list(cset.counts) == [0, 3, 7]


def test_validate_citation_set_rejects_empty():
    with pytest.raises(EmptySetError):
        validate_citation_set([], "x")


def test_validate_citation_set_rejects_negative():
    with pytest.raises(NegativeCountError):
        validate_citation_set([5, -1], "x")


@pytest.mark.parametrize("raw", [[1, 2.5], [True, 2], ["3"], [1, float("nan")]])
def test_validate_citation_set_rejects_non_integers(raw):
    with pytest.raises(BadCountsError):
        validate_citation_set(raw, "x")


def test_integral_floats_become_integer_counts():
    cset = validate_citation_set([1.0, 4.0], "x")
    assert cset.counts.dtype == np.int64


def test_citation_set_is_read_only():
    cset = CitationSet("s1", np.array([1, 2, 3]))
    with pytest.raises(ValueError):
        cset.counts[0] = 9


def test_citation_set_needs_label():
    with pytest.raises(InvalidSpecError):
        CitationSet(" ", np.array([1]))


def test_fuzzed_inputs_rejected_iff_invalid():
    rng = np.random.default_rng(7)
    for _ in range(200):
        raw = rng.integers(-3, 20, size=rng.integers(0, 6)).tolist()
        invalid = not raw or min(raw) < 0
        if invalid:
            with pytest.raises(DoubleRankError):
                validate_citation_set(raw, "fuzz")
        else:
            assert validate_citation_set(raw, "fuzz").size == len(raw)


@pytest.mark.parametrize(
    "mu, sigma, n, seed",
    [(1.0, 0.0, 10, 1), (1.0, -1.0, 10, 1), (1.0, 1.0, 0, 1), (1.0, 1.0, 2.5, 1), (1.0, 1.0, 5, -1), (1.0, 1.0, 5, 2**64)],
)
def test_lognormal_spec_rejects_bad_values(mu, sigma, n, seed):
    with pytest.raises(InvalidSpecError):
        LognormalSpec(mu, sigma, n, seed)


def _series(x, n, local_size=10, **kw):
    return PercentileSeries("W", "L", 100, local_size, np.array(x, dtype=float), np.array(n, dtype=float), **kw)


def test_series_shares_and_points():
    series = _series([10, 50, 100], [2, 6, 10])
    assert series.shares.tolist() == pytest.approx([20.0, 60.0, 100.0])
    assert series.points[1] == pytest.approx((50.0, 6.0, 60.0))
    assert len(series) == 3


@pytest.mark.parametrize("x", [[10, 10, 100], [50, 10, 100], [0, 10, 100], [10, 50, 101]])
def test_series_rejects_bad_grid(x):
    with pytest.raises(BadGridError):
        _series(x, [1, 2, 10])


def test_series_rejects_decreasing_counts():
    with pytest.raises(NonMonotoneError):
        _series([10, 50, 100], [5, 3, 10])


def test_series_count_at_100_must_match_size():
    with pytest.raises(NonMonotoneError):
        _series([10, 50, 100], [2, 6, 9])


def test_series_counts_bounded_by_size():
    with pytest.raises(BadCountsError):
        _series([10, 50], [2, 11])


def test_fit_method_parse():
    assert FitMethod.parse(" lm ") is FitMethod.LM
    with pytest.raises(InvalidSpecError):
        FitMethod.parse("spline")


def test_closed_form_fit_carries_no_goodness_of_fit():
    fit = PowerLawFit(2.0, 1.0, FitMethod.CLOSED_FORM, None, None, None)
    assert fit.chi2 is None
    with pytest.raises(DoubleRankError):
        PowerLawFit(2.0, 1.0, FitMethod.CLOSED_FORM, 0.0, 1, 1.0)


@pytest.mark.parametrize(
    "a, dof, chi2, p",
    [(0.0, 1, 0.0, 1.0), (1.0, 0, 0.0, 1.0), (1.0, 1, -0.1, 1.0), (1.0, 1, 0.0, 1.5)],
)
def test_power_law_fit_invariants(a, dof, chi2, p):
    with pytest.raises(DoubleRankError):
        PowerLawFit(a, 1.0, FitMethod.LR, chi2, dof, p)


def test_power_law_fit_predict_and_tail_exponent():
    fit = PowerLawFit(2.0, -1.5, FitMethod.LR, 0.0, 3, 1.0)
    assert fit.predict(4.0) == pytest.approx(2.0 * 4.0 ** -1.5)
    assert fit.tail_exponent == 1.5


def test_css_result_invariants():
    CssResult((2.0, 5.0), (70.0, 21.0, 9.0), 2)
    with pytest.raises(DoubleRankError):
        CssResult((5.0, 2.0), (70.0, 21.0, 9.0), 2)
    with pytest.raises(DoubleRankError):
        CssResult((2.0, 5.0), (70.0, 21.0, 8.0), 2)


def _corruptions(ind):
    flipped = "alpha_nonpositive" if ind.quality == "ok" else "ok"
    return [
        ("e_p", ind.e_p * (1 + 1e-6)),
        ("alpha", ind.alpha + 0.5),
        ("p_top_001", ind.p_top_001 * 1.001),
        ("p_top_001", -1.0),
        ("p_top_10", -ind.p_top_10),
        ("n_total", 0.5),
        ("percentile", 500.0),
        ("percentile", 0.0),
        ("quality", flipped),
        ("prob", ind.prob * 2),
    ]


def test_fuzzed_indicator_sets_rejected_iff_invalid():
    rng = np.random.default_rng(11)
    for _ in range(200):
        alpha = rng.uniform(0.05, 3.0) if rng.random() < 0.7 else rng.uniform(-2.0, -0.05)
        percentile = 100.0 if rng.random() < 0.1 else rng.uniform(0.001, 100.0)
        fit = PowerLawFit(1.0, alpha, FitMethod.LR, 0.0, 3, 1.0)
        ind = indicator_set(fit, int(rng.integers(1, 10**6)), percentile)
        assert dataclasses.replace(ind) == ind
        cases = _corruptions(ind)
        name, value = cases[rng.integers(len(cases))]
        with pytest.raises(DoubleRankError):
            dataclasses.replace(ind, **{name: value})


def test_indicator_set_rejects_ok_quality_outside_unit_interval():
    ind = indicator_set(PowerLawFit(1.0, -0.4, FitMethod.LR, 0.0, 3, 1.0), 100)
    assert ind.quality == "alpha_nonpositive"
    assert ind.e_p > 1
    with pytest.raises(DoubleRankError):
        dataclasses.replace(ind, quality="ok")


def test_indicator_set_methods_check_the_percentile():
    ind = indicator_set(PowerLawFit(1.0, 0.876, FitMethod.LR, 0.0, 3, 1.0), 100)
    assert ind.prob_at(100) == 1.0
    assert ind.freq_at(10) == pytest.approx(100 * 0.1 ** 0.876)
    for x in (500, 0, -1):
        with pytest.raises(BadPercentileError):
            ind.prob_at(x)
        with pytest.raises(BadPercentileError):
            ind.freq_at(x)
