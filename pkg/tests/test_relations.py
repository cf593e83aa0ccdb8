import pytest

from llnlab.distributions import parse_distribution
from llnlab.models import DriftModel, IidCopiesModel, parse_model, parse_rate
from llnlab.modes import CheckConfig, ConvergenceMode
from llnlab.relations import (
    IMPLIES,
    NOT_IMPLIES,
    OPEN,
    CheckContext,
    ImplicationEdge,
    MATRIX_MODES,
    build_registry,
    confirm_counterexample,
    default_corpus,
    full_relation_matrix,
    registry_closure_check,
    slutsky_compose,
    verify_implication,
)
from llnlab.rng import make_rng_stream


@pytest.fixture(scope="module")
def report():
    return full_relation_matrix(seed=1)


@pytest.fixture(scope="module")
def ctx():
    return CheckContext(config=CheckConfig(rng=make_rng_stream(1, 0)))


def _edge(registry, src, dst, status):
    for e in registry.edges:
        if (e.src, e.dst, e.status) == (src, dst, status):
            return e
    raise AssertionError(f"edge {src} -> {dst} [{status}] not registered")


def test_registry_is_internally_consistent():
    registry = build_registry()
    registry_closure_check(registry)
    for edge in registry.edges:
        if edge.status == NOT_IMPLIES:
            assert edge.counterexample
        if edge.status == OPEN:
            assert edge.question
    assert any("Q6" in note for note in registry.open_notes)
    assert any("(alpha>0)" in e.citation for e in registry.edges if e.question == "Q5")


def test_registry_rejects_malformed_edges():
    with pytest.raises(ValueError):
        ImplicationEdge("cc", "as", NOT_IMPLIES, "missing witness")
    with pytest.raises(ValueError):
        ImplicationEdge("cc", "as", OPEN, "missing question id")


def test_moment_to_tail_edge_passes_with_a_real_witness(ctx):
    registry = build_registry()
    edge = _edge(registry, "s-lp", "cc", IMPLIES)
    outcome = verify_implication(edge, [parse_model("exa-3.1")], ctx)
    assert outcome.outcome == "PASS"
    assert outcome.witnesses == ["exa-3.1"]  # both sides hold, not vacuous


def test_vacuous_pass_is_recorded_without_a_witness(ctx):
    registry = build_registry()
    edge = _edge(registry, "s-linf", "s-lp", IMPLIES)
    outcome = verify_implication(edge, [parse_model("exa-3.1")], ctx)
    assert outcome.outcome == "PASS" and not outcome.witnesses
    assert outcome.rows[0]["from"] == "FAILS"


def test_tail_to_pointwise_edge_on_the_third_example(ctx):
    registry = build_registry()
    edge = _edge(registry, "cc", "as", IMPLIES)
    outcome = verify_implication(edge, [parse_model("exa-3.3:alpha=1")], ctx)
    assert outcome.outcome == "PASS" and outcome.witnesses


@pytest.mark.parametrize(
    "src,dst,example",
    [
        ("s-lp", "s-linf", "exa-3.1"),
        ("cc", "s-alpha-as", "exa-3.3"),
        ("s1-d", "in-prob", "exa-3.4"),
        ("s-alpha-as", "s2-d", "exa-3.2"),
    ],
)
def test_registered_counterexamples_are_confirmed(ctx, src, dst, example):
    registry = build_registry()
    edge = _edge(registry, src, dst, NOT_IMPLIES)
    assert edge.counterexample == example
    outcome = confirm_counterexample(edge, ctx)
    assert outcome.outcome == "PASS"


def test_slutsky_sum_product_quotient_all_hold(ctx):
    x = IidCopiesModel(parse_distribution("normal(0,1)[-3,3]"))
    y = DriftModel(center=2.0, rate=parse_rate("inv-n2"))
    for op in ("sum", "product", "quotient"):
        composed, verdict = slutsky_compose(x, y, op, ctx)
        assert verdict.verdict == "HOLDS", op
    assert composed.limit.token == "normal(0,0.5)[-1.5,1.5]"


def test_slutsky_hypothesis_violations_name_the_clause(ctx):
    bounded = IidCopiesModel(parse_distribution("normal(0,1)[-3,3]"))
    unbounded = IidCopiesModel(parse_distribution("normal"))
    zero_limit = DriftModel(center=0.0, rate=parse_rate("inv-n2"))
    good = DriftModel(center=2.0, rate=parse_rate("inv-n2"))
    with pytest.raises(ValueError, match="nonzero limit"):
        slutsky_compose(bounded, zero_limit, "quotient", ctx)
    with pytest.raises(ValueError, match="bounded first operand"):
        slutsky_compose(unbounded, good, "product", ctx)
    slow = DriftModel(center=2.0, rate=parse_rate("inv-log"))  # not first-moment summable
    with pytest.raises(ValueError, match="first-moment distance"):
        slutsky_compose(bounded, slow, "sum", ctx)


def test_constant_limit_equivalence_rows(report):
    rows = {r["model"]: r for r in report.equivalence_rows}
    uniform = rows["scaled:center=0,noise=uniform,rate=inv-n2"]
    cauchy = rows["scaled:center=0,noise=cauchy,rate=inv-sqrt"]
    assert (uniform["s2-d"], uniform["cc"]) == ("HOLDS", "HOLDS")
    assert (cauchy["s2-d"], cauchy["cc"]) == ("FAILS", "FAILS")
    assert all(r["consistent"] for r in report.equivalence_rows)


def test_full_matrix_passes_with_witnesses_everywhere(report):
    assert report.ok and not report.failures
    for outcome in report.edge_outcomes:
        if outcome.edge.status == IMPLIES:
            assert outcome.outcome == "PASS"
            assert outcome.witnesses, outcome.edge.describe()
        elif outcome.edge.status == NOT_IMPLIES:
            assert outcome.outcome == "PASS"
        else:
            assert outcome.outcome == "SKIPPED"


def test_matrix_cells_are_complete_and_self_consistent(report):
    for a in MATRIX_MODES:
        for b in MATRIX_MODES:
            assert (a, b) in report.matrix
        assert report.matrix[(a, a)] == "SELF"
    assert report.matrix[("s-lp", "cc")] == "IMPLIES"
    assert report.matrix[("s-linf", "cc")] == "IMPLIES_VIA_CLOSURE"
    assert report.matrix[("s-alpha-as", "cc")] == "NOT_IMPLIES"
    assert report.matrix[("s-alpha-as", "s1-d")] == "OPEN"


def test_lipschitz_domination_of_the_test_function_series(ctx):
    # whenever the first-moment series is provably summable, every family
    # member series is bounded by its Lipschitz constant times that sum
    from llnlab.modes import TestFunctionFamily, s1d_series
    from llnlab.series import Verdict, diagnose_analytic_series

    for token in ("exa-3.1", "shifted:base=normal,rate=inv-n2"):
        model = parse_model(token)
        slp = diagnose_analytic_series(
            lambda ns: model.deviation_moment(ns, 1.0), 8192,
            form=model.moment_series_form(1.0),
        )
        assert slp.verdict is Verdict.CONVERGENT
        family = TestFunctionFamily.default_for(model.limit)
        rep = s1d_series(model, family, horizon=8192)
        assert rep.overall is Verdict.CONVERGENT
        lipschitz = {m.label: m.lipschitz for m in family.members}
        for label, diag in rep.members.items():
            assert diag.total <= lipschitz[label] * slp.total * (1 + 1e-9) + 1e-12


def test_density_route_rows_are_consistent(report):
    assert report.density_route_rows
    assert all(r["consistent"] for r in report.density_route_rows)


def test_report_payload_is_json_ready(report):
    import json

    payload = report.to_payload()
    text = json.dumps(payload, sort_keys=True)
    assert "matrix" in payload and "edges" in payload
    assert len(payload["matrix"]) == len(MATRIX_MODES) ** 2
    assert json.loads(text)["ok"] is True


def test_default_corpus_models_are_well_formed():
    corpus = default_corpus()
    assert len(corpus) >= 12
    tokens = [m.token for m in corpus]
    assert len(set(tokens)) == len(tokens)


def test_models_without_analytic_support_are_skipped_and_recorded(ctx):
    registry = build_registry()
    edge = _edge(registry, "s-lp", "cc", IMPLIES)
    probe_only = parse_model("powtail:coef=1,rho=0.5")
    outcome = verify_implication(edge, [probe_only, parse_model("exa-3.1")], ctx)
    assert outcome.outcome == "PASS"
    assert outcome.skipped == [probe_only.token]
    assert any("skipped" in row for row in outcome.rows)


def test_contradicted_counterexample_fails_with_an_evidence_dump(ctx):
    # an artificial negative edge whose source claim is wrong on purpose
    bogus = ImplicationEdge("s-linf", "cc", NOT_IMPLIES,
                            "deliberately wrong registration for the alarm path",
                            counterexample="exa-3.1")
    outcome = confirm_counterexample(bogus, ctx)
    assert outcome.outcome == "FAIL"
    assert "expected HOLDS" in outcome.note
    assert any("evidence-dump" in row for row in outcome.rows)
