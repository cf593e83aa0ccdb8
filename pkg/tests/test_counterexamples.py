import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llnlab import counterexamples as cx
from llnlab.distributions import UnsupportedQuery

EXA31 = cx.ExampleSpec("exa-3.1")
EXA32 = cx.ExampleSpec("exa-3.2")
EXA33 = lambda a: cx.ExampleSpec("exa-3.3", alpha=a)


def test_pointwise_values_follow_the_printed_branches():
    assert cx.eval_example(EXA31, 3, 0.05) == 1.0  # 0.05 < 1/9
    assert cx.eval_example(EXA31, 3, 0.2) == 0.0
    assert cx.eval_example(EXA33(2.0), 4, 0.5) == pytest.approx(4.0**-0.5)
    assert np.array_equal(
        cx.eval_example(EXA32, np.arange(1, 6), 0.3), np.array([1.0, 1.0, 1.0, 0.0, 0.0])
    )


def test_boundary_takes_the_half_open_lower_branch():
    # omega exactly 1/n^2 belongs to the closed lower interval
    assert cx.eval_example(EXA31, 2, 0.25) == 0.0
    assert cx.eval_example(EXA32, 2, 0.5) == 0.0
    assert cx.eval_example(EXA33(1.0), 2, 0.25) == 0.5


def test_omega_domain_is_strictly_inside_the_unit_interval():
    for omega in (0.0, 1.0, -0.2, 1.4):
        with pytest.raises(ValueError):
            cx.eval_example(EXA31, 1, omega)


def test_the_iid_example_has_no_pointwise_form():
    with pytest.raises(UnsupportedQuery):
        cx.eval_example(cx.ExampleSpec("exa-3.4"), 1, 0.5)
    with pytest.raises(UnsupportedQuery):
        cx.example_series_term(cx.ExampleSpec("exa-3.4"), cx.AlphaPathTerm(1.0, 0.5), 3)


def test_series_terms_match_the_closed_forms():
    assert cx.example_series_term(EXA31, cx.PthMoment(5.0), 10) == pytest.approx(0.01)
    assert cx.example_series_term(EXA31, cx.SupNorm(), 7) == 1.0
    assert cx.example_series_term(EXA33(1.0), cx.AlphaPathTerm(1.0, 0.9), 5) == pytest.approx(0.2)
    assert cx.example_series_term(EXA32, cx.TailProb(0.5), 4) == pytest.approx(0.25)
    assert cx.example_series_term(EXA32, cx.TailProb(1.5), 4) == 0.0


def test_tail_cutoff_of_the_third_example_by_brute_force():
    for alpha in (0.5, 1.0, 2.0, 3.7):
        spec = EXA33(alpha)
        for eps in (0.9, 0.5, 0.21, 0.125):
            cut = cx.tail_prob_cutoff(spec, eps)
            assert cut ** (-1.0 / alpha) < eps
            assert cut == 1 or not (cut - 1) ** (-1.0 / alpha) < eps
            ns = np.arange(1, cut + 50)
            terms = np.asarray(cx.example_series_term(spec, cx.TailProb(eps), ns))
            brute = np.where(ns.astype(float) ** (-1.0 / alpha) >= eps, 1.0, ns.astype(float) ** -2.0)
            assert np.array_equal(terms, brute)


def test_moment_partial_sums_equal_generalized_harmonic_numbers():
    ns = np.arange(1, 10_001)
    oracle = np.cumsum(1.0 / ns.astype(float) ** 2)  # direct summation
    for p in (0.5, 1.0, 2.0, 7.0):
        terms = np.asarray(cx.example_series_term(EXA31, cx.PthMoment(p), ns))
        partial = np.cumsum(terms)
        assert np.allclose(partial, oracle, rtol=0, atol=0)
    assert partial[-1] < math.pi**2 / 6


@given(omega=st.floats(min_value=1e-6, max_value=1.0 - 1e-9, exclude_max=True))
@settings(max_examples=100, deadline=None)
def test_second_example_has_a_finite_activation_set(omega):
    cut = cx.nonzero_path_cutoff(EXA32, omega)
    assert cut <= math.ceil(1.0 / omega) - 1
    ns = np.arange(1, cut + 10)
    values = np.asarray(cx.eval_example(EXA32, ns, omega))
    assert values[:cut].sum() == cut  # every active index is below the cutoff
    assert values[cut:].sum() == 0.0


@pytest.mark.parametrize(
    "spec,quantity,n_probe,p",
    [
        (EXA31, "moment", 64, 2.0),
        (EXA32, "moment", 64, 1.0),
        (EXA33(1.0), "moment", 64, 1.0),
        (EXA33(2.0), "moment", 17, 3.0),
    ],
)
def test_monte_carlo_consistency_of_analytic_terms(spec, quantity, n_probe, p, uniform_omegas):
    xs = np.abs(np.asarray([cx.eval_example(spec, n_probe, float(w)) for w in uniform_omegas[:20000]]))
    empirical = (xs**p).mean()
    se = (xs**p).std(ddof=1) / math.sqrt(len(xs))
    analytic = float(cx.example_series_term(spec, cx.PthMoment(p), n_probe))
    assert abs(empirical - analytic) <= 3 * se + 1e-12


def test_expected_verdicts_cover_the_registered_claims():
    registered = {
        "exa-3.1": {"s-lp": "HOLDS", "s-linf": "FAILS"},
        "exa-3.2": {"s-alpha-as": "HOLDS", "cc": "FAILS", "s-lp": "FAILS"},
        "exa-3.3": {"cc": "HOLDS", "s-alpha-as": "FAILS"},
        "exa-3.4": {"s1-d": "HOLDS", "s2-d": "HOLDS", "in-prob": "FAILS"},
    }
    total = 0
    for name, expected in registered.items():
        claims = cx.example_expected_verdicts(cx.ExampleSpec(name)).claims
        got = {c.mode: c.expected for c in claims}
        assert got == expected
        total += len(claims)
    assert total == 10


def test_unknown_example_and_bad_parameters_are_rejected():
    with pytest.raises(ValueError):
        cx.ExampleSpec("exa-9.9")
    with pytest.raises(ValueError):
        cx.ExampleSpec("exa-3.3", alpha=0.0)
    with pytest.raises(ValueError):
        cx.PthMoment(0.0)
    with pytest.raises(ValueError):
        cx.AlphaPathTerm(1.0, 1.5)
