import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llnlab.series import (
    SeriesForm,
    Verdict,
    diagnose_analytic_series,
    diagnose_empirical_series,
    fit_loglog_slope,
    fit_tail_exponent,
    power_law_interpolate,
)

HORIZON = 10**5


def test_inverse_square_terms_fit_exponent_two():
    fit, verdict, _ = fit_tail_exponent(np.arange(1.0, HORIZON + 1) ** -2.0)
    assert verdict is Verdict.CONVERGENT
    assert fit.exponent == pytest.approx(2.0, abs=0.05)


def test_harmonic_terms_sit_in_the_band_and_escalate_to_divergent():
    terms = 1.0 / np.arange(1.0, HORIZON + 1)
    fit, verdict, _ = fit_tail_exponent(terms)
    assert verdict is Verdict.INCONCLUSIVE
    assert fit.exponent == pytest.approx(1.0, abs=0.05)
    # the analytic route recognizes the harmonic lower bound (oracle: partial
    # sums of the harmonic series still grow; sum_{n<=N} 1/n ~ log N)
    diag = diagnose_analytic_series(lambda ns: 1.0 / ns.astype(float), HORIZON)
    assert diag.verdict is Verdict.DIVERGENT
    assert "harmonic-comparison" in diag.flags
    assert diag.total == pytest.approx(math.log(HORIZON) + 0.5772156649, abs=0.01)


def test_log_squared_harmonic_is_summable_but_never_declared_divergent():
    # truth oracle: direct block summation to 1e8 terms; the last-decade
    # increment matches the exact integral 1/log(1e7) - 1/log(1e8) and the
    # remaining tail is bounded by 1/log(1e8), so the series converges
    total = 0.0
    tail_increment = 0.0
    for lo in range(1, 10**8, 10**7):
        ns = np.arange(lo, lo + 10**7, dtype=float)
        chunk = float((1.0 / (ns * np.log(ns + 1.0) ** 2)).sum())
        total += chunk
        if lo > 10**7:
            tail_increment += chunk
    integral = 1.0 / math.log(10**7) - 1.0 / math.log(10**8)
    assert tail_increment == pytest.approx(integral, rel=0.02)
    assert math.isfinite(total + 1.0 / math.log(10**8))

    diag = diagnose_analytic_series(lambda ns: 1.0 / (ns * np.log(ns + 1.0) ** 2), HORIZON)
    # at this horizon the local exponent 1 + 2/log(n) keeps the fit above the
    # band, so the honest outcomes are CONVERGENT or INCONCLUSIVE, never DIVERGENT
    assert diag.verdict in (Verdict.CONVERGENT, Verdict.INCONCLUSIVE)
    assert diag.verdict is not Verdict.DIVERGENT


@pytest.mark.parametrize("beta,expected", [(0.5, Verdict.DIVERGENT), (1.25, Verdict.CONVERGENT), (1.5, Verdict.CONVERGENT)])
def test_power_terms_classify_with_margin(beta, expected):
    diag = diagnose_analytic_series(lambda ns: ns.astype(float) ** -beta, 2 * 10**4)
    assert diag.verdict is expected
    assert diag.fit.exponent == pytest.approx(beta, abs=0.05)


@given(scale=st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=25, deadline=None)
def test_fit_is_scale_invariant(scale):
    terms = np.arange(1.0, 4097.0) ** -1.6
    base_fit, base_verdict, _ = fit_tail_exponent(terms)
    fit, verdict, _ = fit_tail_exponent(scale * terms)
    assert verdict is base_verdict
    assert fit.exponent == pytest.approx(base_fit.exponent, abs=1e-9)


def test_all_zero_terms_are_convergent():
    fit, verdict, flags = fit_tail_exponent(np.zeros(1000))
    assert verdict is Verdict.CONVERGENT and fit is None and "zero-series" in flags


def test_too_few_points_are_inconclusive():
    _, verdict, flags = fit_tail_exponent(np.ones(16))
    assert verdict is Verdict.INCONCLUSIVE and "insufficient-data" in flags


def test_zero_tail_counts_as_a_finite_sum():
    terms = np.zeros(HORIZON)
    terms[:50] = 1.0
    _, verdict, flags = fit_tail_exponent(terms)
    assert verdict is Verdict.CONVERGENT and "zero-tail" in flags


def test_closed_forms_override_the_fit():
    diag = diagnose_analytic_series(lambda ns: 1.0 / ns, 4096, form=SeriesForm("power", power=1.0))
    assert diag.verdict is Verdict.DIVERGENT
    diag = diagnose_analytic_series(
        lambda ns: 1.0 / ns**1.05, 4096, form=SeriesForm("power", power=1.05)
    )
    assert diag.verdict is Verdict.CONVERGENT  # exact even inside the fit band
    with pytest.raises(ValueError):
        SeriesForm("power", power=0.5, is_bound=True)  # bounds cannot certify divergence


def test_infinite_terms_diverge_with_a_flag():
    diag = diagnose_analytic_series(
        lambda ns: np.where(ns < 5, np.inf, 1.0 / ns**2), 4096
    )
    assert diag.verdict is Verdict.DIVERGENT
    assert "infinite-terms" in diag.flags


def test_power_law_interpolation_hits_grid_points_exactly():
    grid = np.array([1, 4, 16, 64, 256])
    values = grid.astype(float) ** -1.5
    dense = power_law_interpolate(grid, values, 256)
    assert np.allclose(dense[grid - 1], values, rtol=0, atol=0)
    ns = np.arange(1.0, 257.0)
    assert np.allclose(dense, ns**-1.5, rtol=1e-12)


def test_empirical_noise_floor_demotes_convergent_to_inconclusive():
    grid = np.array([1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096])
    terms = grid.astype(float) ** -2.0
    low = np.zeros(len(grid), dtype=bool)
    low[-5:] = True
    diag = diagnose_empirical_series(grid, terms, 4096, low_count_mask=low)
    assert diag.verdict is Verdict.INCONCLUSIVE
    assert "noise-floor" in diag.flags


def test_empirical_all_zero_is_degenerate_only_when_allowed():
    grid = np.array([1, 2, 4, 8, 16, 32, 64])
    zeros = np.zeros(len(grid))
    degenerate = diagnose_empirical_series(grid, zeros, 64, all_zero_is_degenerate=True)
    assert degenerate.verdict is Verdict.CONVERGENT and "degenerate" in degenerate.flags
    undecided = diagnose_empirical_series(grid, zeros, 64)
    assert undecided.verdict is Verdict.INCONCLUSIVE and "noise-floor" in undecided.flags


def test_loglog_slope_recovers_known_exponent():
    ns = np.array([100.0, 1000.0, 10000.0])
    fit = fit_loglog_slope(ns, 3.0 * ns**1.5)
    assert fit.exponent == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(ValueError):
        fit_loglog_slope(ns, np.array([1.0, 0.0, 2.0]))


def test_partial_sums_reported_on_the_dyadic_grid():
    diag = diagnose_analytic_series(lambda ns: ns.astype(float) ** -2.0, 1000)
    assert diag.grid_ns[0] == 1 and diag.grid_ns[-1] == 1000
    oracle = float((np.arange(1.0, 1001.0) ** -2.0).sum())  # direct summation
    assert diag.total == pytest.approx(oracle, rel=1e-12)
    assert np.all(np.diff(diag.grid_partial_sums) >= 0)
