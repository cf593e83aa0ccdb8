import math

import numpy as np
import pytest
from scipy import integrate

from llnlab import counterexamples as cx
from llnlab.distributions import UnsupportedQuery, parse_distribution
from llnlab.models import parse_model
from llnlab.modes import (
    CheckConfig,
    ConvergenceMode,
    ExtractionStalled,
    RampFunction,
    TestFunctionFamily,
    check_mode,
    default_eval_points,
    extract_strong_subsequence,
    log_weight_tail_series,
    monte_carlo_tail_probe,
    s1d_series,
    s2d_series,
    s2d_series_for_model,
)
from llnlab.rng import make_rng_stream
from llnlab.series import Verdict

CFG = CheckConfig(rng=make_rng_stream(1, 0))


# -- subsequence extraction ---------------------------------------------------


def test_extractor_on_the_power_tail_model_matches_hand_arithmetic():
    # P(|X_n| >= t) = min(1, 1/(t sqrt(n))) <= 1/k^2 at t = 1/k^2 iff n >= k^8
    indices = extract_strong_subsequence(parse_model("powtail:coef=1,rho=0.5"), 1.0, 5)
    expected = []
    prev = 0
    for k in range(1, 6):
        prev = max(k**8, prev + 1)
        expected.append(prev)
    assert list(indices) == expected == [1, 256, 6561, 65536, 390625]


def test_extractor_on_a_degenerate_model_takes_every_index():
    indices = extract_strong_subsequence(parse_model("const:center=2"), 1.0, 10)
    assert list(indices) == list(range(1, 11))


def test_extractor_on_the_second_example_squares_the_counter():
    indices = extract_strong_subsequence(parse_model("exa-3.2"), 1.0, 30)
    expected, prev = [], 0
    for k in range(1, 31):
        prev = max(k * k, prev + 1)
        expected.append(prev)
    assert list(indices) == expected


def test_extractor_contract_bound_holds_at_every_k():
    model = parse_model("exa-3.2")
    indices = extract_strong_subsequence(model, 1.0, 30)
    for k, n in enumerate(indices, start=1):
        bound = 1.0 / k**2
        prob = float(model.deviation_tail(np.array([n]), bound ** 1.0)[0])
        assert prob <= bound + 1e-15


def test_extractor_stalls_with_the_failing_k():
    with pytest.raises(ExtractionStalled) as err:
        extract_strong_subsequence(parse_model("powtail:coef=1,rho=0.5"), 1.0, 5, index_cap=1000)
    assert err.value.k == 3  # k=3 needs n >= 6561 > 1000


def test_monte_carlo_probe_tracks_the_analytic_tail():
    model = parse_model("exa-3.2")
    probe = monte_carlo_tail_probe(model, make_rng_stream(5, 0), reps=400, horizon=64)
    ns = np.array([2, 8, 32])
    analytic = model.deviation_tail(ns, 0.5)
    estimates = probe(ns, 0.5)
    assert np.all(np.abs(estimates - analytic) <= 4 * np.sqrt(0.25 / 400) + probe.precision)


# -- family and distribution-distance series -----------------------------------


def test_s1d_is_zero_for_identically_distributed_copies():
    report = s1d_series(parse_model("exa-3.4:dist=normal"), horizon=4096)
    assert report.overall is Verdict.CONVERGENT
    assert all(d.total == 0.0 for d in report.members.values())


def test_s1d_holds_for_square_summable_shifts():
    report = s1d_series(parse_model("shifted:base=normal,rate=inv-n2"), horizon=8192)
    assert report.overall is Verdict.CONVERGENT


def test_s1d_fails_for_root_n_shifts_with_gaussian_oracle():
    model = parse_model("shifted:base=normal,rate=inv-sqrt")
    ramp = RampFunction(0.0, 1.0)
    ns = np.array([4, 100, 2500])
    gaps = model.s1d_gap(ns, ramp.center, ramp.width)
    for n, gap in zip(ns, gaps):
        delta = n**-0.5
        oracle, _ = integrate.quad(
            lambda x: float(np.clip(x + delta, -1, 1) - np.clip(x, -1, 1))
            * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
            -np.inf, np.inf,
        )
        assert gap == pytest.approx(abs(oracle), rel=1e-6)
    # the gaps scale like 1/sqrt(n) (up to second order in the shift), so the
    # series diverges
    assert gaps[0] / gaps[2] == pytest.approx(25.0, rel=0.03)
    report = s1d_series(model, horizon=8192)
    assert report.overall is Verdict.DIVERGENT


def test_s1d_family_growth_can_only_demote_the_verdict():
    model = parse_model("shifted:base=normal,rate=inv-n2")
    base = TestFunctionFamily.default_for(model.limit)
    extended = base.extended([RampFunction(5.0, 0.01), RampFunction(-7.0, 2.0)])
    order = {Verdict.DIVERGENT: 0, Verdict.INCONCLUSIVE: 1, Verdict.CONVERGENT: 2}
    small = s1d_series(model, base, horizon=4096)
    big = s1d_series(model, extended, horizon=4096)
    assert order[big.overall] <= order[small.overall]


def test_ramp_functions_are_bounded_lipschitz():
    ramp = RampFunction(0.5, 0.25)
    xs = np.linspace(-4, 4, 1001)
    values = ramp(xs)
    assert np.max(np.abs(values)) <= 1.0
    slopes = np.abs(np.diff(values) / np.diff(xs))
    assert slopes.max() <= ramp.lipschitz + 1e-9
    assert ramp.lipschitz == 4.0


def test_default_family_uses_quantile_anchors():
    family = TestFunctionFamily.default_for(parse_model("shifted:base=normal,rate=inv-n2").limit)
    centers = {m.center for m in family.members}
    widths = {m.width for m in family.members}
    assert widths == {1.0, 0.25, 0.0625}
    assert len(centers) == 21
    constant_family = TestFunctionFamily.default_for(parse_model("const:center=2").limit)
    assert {m.center for m in constant_family.members} == {2.0}


def test_s2d_zero_for_a_constant_sequence_at_its_own_limit():
    report = s2d_series_for_model(parse_model("const:center=1"), horizon=4096)
    assert report.overall is Verdict.CONVERGENT
    assert all(d.total == 0.0 for d in report.members.values())


def test_s2d_drift_terms_vanish_after_finitely_many_indices():
    model = parse_model("drift:center=0,rate=inv-n")
    x = 0.05
    gaps = np.abs(model.marginal_cdf(np.arange(1, 101), x) - float(model.limit.cdf(x)))
    # 1/n falls to x = 0.05 at n = 20 (the step CDF is right continuous there)
    assert np.all(gaps[:19] == 1.0) and np.all(gaps[19:] == 0.0)
    report = s2d_series_for_model(model, horizon=4096)
    assert report.overall is Verdict.CONVERGENT


def test_s2d_cauchy_scaling_diverges_with_the_arctan_oracle():
    model = parse_model("scaled:center=0,noise=cauchy,rate=inv-sqrt")
    x = 0.4
    ns = np.array([100, 10000])
    gaps = np.abs(model.marginal_cdf(ns, x) - 1.0)
    oracle = 0.5 - np.arctan(np.sqrt(ns.astype(float)) * x) / math.pi
    assert np.allclose(gaps, oracle, rtol=1e-12)
    # asymptotically 1/(pi x sqrt(n)): the decade ratio sits near 10, shifted
    # by the second-order arctan correction at sqrt(n) x = 4
    assert gaps[0] / gaps[1] == pytest.approx(10.0, rel=0.03)
    report = s2d_series_for_model(model, horizon=8192)
    assert report.overall is Verdict.DIVERGENT


def test_s2d_rejects_evaluation_points_on_discontinuities():
    model = parse_model("const:center=1")
    with pytest.raises(ValueError, match="discontinuity"):
        s2d_series(model.marginal_cdf, lambda x: float(model.limit.cdf(x)),
                   [1.0], horizon=256, atoms=[1.0])


def test_default_eval_points_avoid_atoms():
    points = default_eval_points(parse_model("const:center=0").limit)
    assert 0.0 not in points
    assert np.all(np.abs(points) > 1e-12)
    continuous = default_eval_points(parse_model("shifted:base=normal,rate=inv-n2").limit)
    assert len(continuous) == 21


# -- the weighted tail route -----------------------------------------------------


def test_log_weight_series_is_zero_for_cubic_drift():
    diag = log_weight_tail_series(parse_model("drift:center=0,rate=inv-n3"), 1.0, 1.0, 20000)
    assert diag.verdict is Verdict.CONVERGENT
    assert diag.total == 0.0  # n (log n)^2 / n^3 stays below 1 for every n


def test_log_weight_series_diverges_for_log_drift():
    diag = log_weight_tail_series(parse_model("drift:center=0,rate=inv-log"), 1.0, 0.5, 20000)
    assert diag.verdict is Verdict.DIVERGENT
    assert diag.grid_terms[-1] == 1.0  # the factor grows, so terms lock at one


def test_log_weight_series_zero_for_scaled_uniform():
    # the weighted threshold n/(log n)^2 exceeds the uniform's support bound 1
    # at every index (max of (log n)^2 / n is about 0.54), so all terms vanish
    diag = log_weight_tail_series(
        parse_model("scaled:center=0,noise=uniform(0,1),rate=inv-n2"), 1.0, 1.0, 20000
    )
    assert diag.verdict is Verdict.CONVERGENT
    assert diag.total == 0.0


def test_log_weight_series_validates_parameters():
    model = parse_model("drift:center=0,rate=inv-n3")
    with pytest.raises(ValueError):
        log_weight_tail_series(model, 0.0, 1.0, 100)
    with pytest.raises(ValueError):
        log_weight_tail_series(model, 1.0, -1.0, 100)


# -- dispatcher routes ------------------------------------------------------------


def test_sup_norm_mode_needs_an_analytic_bound():
    with pytest.raises(UnsupportedQuery, match="essential suprema"):
        check_mode(parse_model("iid-mean:dist=uniform(0,1)"), ConvergenceMode("s-linf"), CFG)


def test_mode_parameter_validation():
    with pytest.raises(ValueError):
        ConvergenceMode("s-lp")
    with pytest.raises(ValueError):
        ConvergenceMode("s-alpha-as", alpha=-1.0)
    with pytest.raises(ValueError):
        ConvergenceMode("weak-star")


def test_strong_as_monte_carlo_route_separates_the_dichotomy():
    cfg = CheckConfig(rng=make_rng_stream(3, 0), paths=100, path_horizon=20000)
    model = parse_model("iid-mean:dist=rademacher")
    holds = check_mode(model, ConvergenceMode("s-alpha-as", alpha=4.0), cfg)
    fails = check_mode(model, ConvergenceMode("s-alpha-as", alpha=2.0), cfg)
    assert holds.verdict == "HOLDS" and holds.method == "monte-carlo"
    assert fails.verdict == "FAILS" and fails.method == "monte-carlo"


def test_plain_limit_modes_use_exact_statements_where_known():
    model = parse_model("exa-3.4:dist=normal")
    assert check_mode(model, ConvergenceMode("in-dist"), CFG).verdict == "HOLDS"
    assert check_mode(model, ConvergenceMode("as"), CFG).verdict == "FAILS"
    assert check_mode(model, ConvergenceMode("linf"), CFG).verdict == "FAILS"
    drift = parse_model("drift:center=0.5,rate=inv-n2")
    assert check_mode(drift, ConvergenceMode("lp", p=1.0), CFG).verdict == "HOLDS"
    assert check_mode(drift, ConvergenceMode("linf"), CFG).verdict == "HOLDS"


def test_trend_heuristic_on_the_power_tail_probe():
    verdict = check_mode(parse_model("powtail:coef=1,rho=0.5"), ConvergenceMode("in-prob"), CFG)
    assert verdict.verdict == "HOLDS"  # exact statement: the tail vanishes


def test_verdict_payload_shape():
    verdict = check_mode(parse_model("exa-3.1"), ConvergenceMode("s-lp", p=2.0), CFG)
    payload = verdict.to_payload()
    assert payload["mode"] == "s-lp" and payload["params"] == {"p": 2.0}
    assert payload["verdict"] == "HOLDS" and payload["method"] == "analytic"
    assert isinstance(payload["flags"], list)
