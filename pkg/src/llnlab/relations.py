"""The implication registry between convergence modes and its verifier.

Positive edges are property-checked over a model corpus (no model may
satisfy the source mode and fail the target), negative edges are confirmed
on their registered counterexamples, open questions are recorded and
skipped.  The registry itself is statically checked: the transitive closure
of the unconditional positive edges must not contain a registered negative
or open pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import counterexamples as cx
from .distributions import UnsupportedQuery, parse_distribution
from .models import (
    ComposedModel,
    DriftModel,
    IidCopiesModel,
    SequenceModel,
    ShiftedLimitModel,
    parse_model,
    parse_rate,
)
from .modes import (
    FAILS,
    HOLDS,
    CheckConfig,
    ConvergenceMode,
    ModeVerdict,
    check_mode,
    log_weight_tail_series,
)
from .rng import RngStream
from .series import Verdict

__all__ = [
    "ImplicationEdge",
    "RelationRegistry",
    "build_registry",
    "registry_closure_check",
    "default_corpus",
    "CheckContext",
    "EdgeOutcome",
    "verify_implication",
    "confirm_counterexample",
    "slutsky_compose",
    "full_relation_matrix",
    "RelationReport",
    "MATRIX_MODES",
]

IMPLIES = "IMPLIES"
NOT_IMPLIES = "NOT_IMPLIES"
OPEN = "OPEN"

# Display instances for the matrix: each tag at its default order parameter.
MATRIX_MODES = (
    "s-linf", "s-lp", "s-alpha-as", "cc", "as", "in-prob",
    "linf", "lp", "in-dist", "s1-d", "s2-d",
)
_DEFAULT_PARAMS = {"s-lp": {"p": 1.0}, "lp": {"p": 1.0}, "s-alpha-as": {"alpha": 1.0}}


@dataclass(frozen=True)
class ImplicationEdge:
    src: str
    dst: str
    status: str
    citation: str
    src_params: tuple[tuple[str, float], ...] = ()
    dst_params: tuple[tuple[str, float], ...] = ()
    scope: str = "general"  # "general" | "constant-limit" | "discrete-open-support"
    counterexample: str | None = None
    question: str | None = None

    def __post_init__(self) -> None:
        if self.status == NOT_IMPLIES and not self.counterexample:
            raise ValueError(f"negative edge {self.describe()} lacks a counterexample")
        if self.status == OPEN and not self.question:
            raise ValueError(f"open edge {self.describe()} lacks a question id")

    def src_mode(self) -> ConvergenceMode:
        return ConvergenceMode(self.src, **dict(self.src_params))

    def dst_mode(self) -> ConvergenceMode:
        return ConvergenceMode(self.dst, **dict(self.dst_params))

    def describe(self) -> str:
        arrow = {IMPLIES: "=>", NOT_IMPLIES: "=/=>", OPEN: "?=>"}[self.status]
        scope = "" if self.scope == "general" else f" [{self.scope}]"
        return f"{self.src_mode().describe()} {arrow} {self.dst_mode().describe()}{scope}"


@dataclass(frozen=True)
class RelationRegistry:
    edges: tuple[ImplicationEdge, ...]
    open_notes: tuple[str, ...]


def _p(value: float) -> tuple[tuple[str, float], ...]:
    return (("p", value),)


def _a(value: float) -> tuple[tuple[str, float], ...]:
    return (("alpha", value),)


def build_registry() -> RelationRegistry:
    edges = (
        # unconditional positive edges (both diagrams)
        ImplicationEdge("s-lp", "cc", IMPLIES,
                        "summable p-th moments dominate the tail series (Markov bound at eps**p)",
                        src_params=_p(1.0)),
        ImplicationEdge("cc", "as", IMPLIES,
                        "summable tails leave only finitely many eps-exceedances (Borel-Cantelli)"),
        ImplicationEdge("as", "in-prob", IMPLIES,
                        "pointwise limits off a null set force vanishing deviation tails"),
        ImplicationEdge("in-prob", "in-dist", IMPLIES,
                        "vanishing deviation tails move the distribution functions at continuity points"),
        ImplicationEdge("linf", "as", IMPLIES,
                        "vanishing sup norms bound every path deviation"),
        ImplicationEdge("lp", "in-prob", IMPLIES,
                        "Markov bound at eps**p", src_params=_p(1.0)),
        ImplicationEdge("linf", "lp", IMPLIES,
                        "the p-th moment is bounded by the p-th power of the sup norm",
                        dst_params=_p(1.0)),
        ImplicationEdge("s-linf", "s-lp", IMPLIES,
                        "once sup norms drop below one, p-th moments are dominated by them (p >= 1)",
                        dst_params=_p(1.0)),
        ImplicationEdge("s-lp", "s-alpha-as", IMPLIES,
                        "monotone convergence: a summable expected series is finite almost surely",
                        src_params=_p(1.0), dst_params=_a(1.0)),
        ImplicationEdge("s-linf", "s-alpha-as", IMPLIES,
                        "sup-norm domination composed with the expected-series argument (alpha >= 1)",
                        dst_params=_a(1.0)),
        ImplicationEdge("s-lp", "s1-d", IMPLIES,
                        "each bounded Lipschitz gap is at most its constant times E|X_n - X|",
                        src_params=_p(1.0)),
        ImplicationEdge("s1-d", "in-dist", IMPLIES,
                        "summable test-function gaps vanish, and ramps pin down weak limits"),
        ImplicationEdge("s-alpha-as", "as", IMPLIES,
                        "terms of an almost surely finite series vanish almost surely",
                        src_params=_a(1.0)),
        # scoped positive edges
        ImplicationEdge("s2-d", "cc", IMPLIES,
                        "for constant limits, summable distribution-function distance and summable "
                        "deviation tails are equivalent (forward direction)",
                        scope="constant-limit"),
        ImplicationEdge("cc", "s2-d", IMPLIES,
                        "for constant limits, summable deviation tails control the distribution "
                        "functions away from the limit atom (backward direction)",
                        scope="constant-limit"),
        ImplicationEdge("cc", "s2-d", IMPLIES,
                        "discrete limits with an open zero-probability set push tail summability "
                        "onto the distribution functions",
                        scope="discrete-open-support"),
        # negative edges, each tied to its counterexample
        ImplicationEdge("s-lp", "s-linf", NOT_IMPLIES,
                        "summable moments of every order with sup deviation pinned at one",
                        src_params=_p(1.0), counterexample="exa-3.1"),
        ImplicationEdge("s-alpha-as", "cc", NOT_IMPLIES,
                        "finitely many nonzero terms per path, yet harmonic tail probabilities",
                        src_params=_a(1.0), counterexample="exa-3.2"),
        ImplicationEdge("s-alpha-as", "s-lp", NOT_IMPLIES,
                        "finitely many nonzero terms per path, yet harmonic moments",
                        src_params=_a(1.0), dst_params=_p(1.0), counterexample="exa-3.2"),
        ImplicationEdge("s-alpha-as", "s-linf", NOT_IMPLIES,
                        "finitely many nonzero terms per path, yet sup deviation pinned at one",
                        src_params=_a(1.0), counterexample="exa-3.2"),
        ImplicationEdge("s-alpha-as", "s2-d", NOT_IMPLIES,
                        "with a constant limit the distribution-function series matches the tail "
                        "series, which is harmonic here",
                        src_params=_a(1.0), counterexample="exa-3.2"),
        ImplicationEdge("cc", "s-alpha-as", NOT_IMPLIES,
                        "square-summable tails but path terms bounded below by 1/n",
                        dst_params=_a(1.0), counterexample="exa-3.3"),
        ImplicationEdge("s1-d", "in-prob", NOT_IMPLIES,
                        "identical marginals zero every gap while deviations never shrink",
                        counterexample="exa-3.4"),
        ImplicationEdge("s2-d", "in-prob", NOT_IMPLIES,
                        "identical marginals zero every distance while deviations never shrink",
                        counterexample="exa-3.4"),
        # open questions
        ImplicationEdge("s1-d", "s2-d", OPEN,
                        "Q1: relation between the two summable distributional modes", question="Q1"),
        ImplicationEdge("s2-d", "s1-d", OPEN,
                        "Q1: relation between the two summable distributional modes", question="Q1"),
        ImplicationEdge("s-linf", "s2-d", OPEN,
                        "Q2: does summable sup-norm distance force summable distribution-function "
                        "distance?", question="Q2"),
        ImplicationEdge("s-lp", "s2-d", OPEN,
                        "Q3: does summable first-moment distance force summable "
                        "distribution-function distance?", src_params=_p(1.0), question="Q3"),
        ImplicationEdge("s-alpha-as", "s1-d", OPEN,
                        "Q4: does strong almost-sure convergence force summable test-function "
                        "distance?", src_params=_a(1.0), question="Q4"),
        ImplicationEdge("cc", "s1-d", OPEN,
                        "Q5: does complete convergence force the summable distributional modes? "
                        "(stray order marker recorded verbatim: '(alpha>0)')", question="Q5"),
        ImplicationEdge("cc", "s2-d", OPEN,
                        "Q5: does complete convergence force the summable distributional modes "
                        "for a general limit? (stray order marker recorded verbatim: '(alpha>0)')",
                        question="Q5"),
    )
    notes = (
        "Q6: whether a Skorokhod-type representation exists that is compatible with the "
        "summable distributional modes and strong almost-sure convergence (no mode pair; "
        "recorded, never tested)",
    )
    return RelationRegistry(edges=edges, open_notes=notes)


def registry_closure_check(registry: RelationRegistry) -> None:
    """Static consistency: no closure of unconditional positive edges may hit a
    registered negative or open pair."""
    direct = {(e.src, e.dst) for e in registry.edges if e.status == IMPLIES and e.scope == "general"}
    tags = {t for pair in direct for t in pair}
    closure = set(direct)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c in tags:
                if (b, c) in closure and (a, c) not in closure and a != c:
                    closure.add((a, c))
                    changed = True
    for e in registry.edges:
        if e.status in (NOT_IMPLIES, OPEN) and (e.src, e.dst) in closure:
            raise AssertionError(
                f"registry inconsistency: {e.describe()} contradicts the positive closure"
            )


# -- the corpus ----------------------------------------------------------------


def default_corpus() -> list[SequenceModel]:
    """Models chosen so every positive edge owns a non-vacuous witness."""
    tokens = [
        "exa-3.1",
        "exa-3.2:alpha=1",
        "exa-3.3:alpha=1",
        "exa-3.4:dist=normal",
        "const:center=1",
        "shifted:base=normal,rate=inv-n2",
        "shifted:base=normal,rate=inv-n",
        "shifted:base=normal,rate=inv-sqrt",
        "shifted:base=normal,rate=inv-log",
        "drift:center=0.5,rate=inv-n2",
        "drift:center=0.5,rate=inv-n",
        "scaled:center=0,noise=cauchy,rate=inv-sqrt",
        "scaled:center=0,noise=uniform(0,1),rate=inv-n2",
    ]
    return [parse_model(t) for t in tokens]


@dataclass
class CheckContext:
    """Shared verdict cache so edges touching the same endpoint reuse work."""

    config: CheckConfig = field(default_factory=CheckConfig)
    cache: dict = field(default_factory=dict)

    def verdict(self, model: SequenceModel, mode: ConvergenceMode) -> ModeVerdict:
        key = (model.token, mode.tag, tuple(sorted(mode.params().items())))
        if key not in self.cache:
            self.cache[key] = check_mode(model, mode, self.config)
        return self.cache[key]


# -- edge verification -----------------------------------------------------------


@dataclass
class EdgeOutcome:
    edge: ImplicationEdge
    outcome: str  # "PASS" | "FAIL" | "SKIPPED"
    rows: list[dict] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    note: str = ""

    def to_payload(self) -> dict:
        e = self.edge
        return {
            "edge": e.describe(),
            "from": e.src_mode().describe(),
            "to": e.dst_mode().describe(),
            "status": e.status,
            "scope": e.scope,
            "citation": e.citation,
            "counterexample": e.counterexample,
            "question": e.question,
            "outcome": self.outcome,
            "witnesses": self.witnesses,
            "violations": self.violations,
            "skipped": self.skipped,
            "rows": self.rows,
            "note": self.note,
        }


def _in_scope(edge: ImplicationEdge, model: SequenceModel) -> bool:
    if edge.scope == "general":
        return True
    if edge.scope == "constant-limit":
        return model.limit.is_constant
    if edge.scope == "discrete-open-support":
        # a finite atom set always leaves the zero-probability set open
        return bool(model.limit.atoms())
    raise ValueError(f"unknown scope {edge.scope!r}")


def verify_implication(
    edge: ImplicationEdge, corpus: list[SequenceModel], ctx: CheckContext
) -> EdgeOutcome:
    """PASS iff no in-scope corpus model holds the source and fails the target."""
    if edge.status != IMPLIES:
        raise ValueError("verify_implication expects a positive edge")
    out = EdgeOutcome(edge=edge, outcome="PASS")
    for model in corpus:
        if not _in_scope(edge, model):
            continue
        try:
            src = ctx.verdict(model, edge.src_mode())
            dst = ctx.verdict(model, edge.dst_mode())
        except UnsupportedQuery as exc:
            out.skipped.append(model.token)
            out.rows.append({"model": model.token, "skipped": str(exc)})
            continue
        out.rows.append({"model": model.token, "from": src.verdict, "to": dst.verdict})
        if src.verdict == HOLDS and dst.verdict == FAILS:
            out.violations.append(model.token)
        elif src.verdict == HOLDS and dst.verdict == HOLDS:
            out.witnesses.append(model.token)
    if out.violations:
        out.outcome = "FAIL"
        out.note = "implication violated on the corpus"
    elif not out.witnesses:
        out.note = "no non-vacuous witness in the corpus"
    return out


def _model_for_example(name: str) -> SequenceModel:
    return parse_model(name if name != "exa-3.4" else "exa-3.4:dist=normal")


def confirm_counterexample(edge: ImplicationEdge, ctx: CheckContext) -> EdgeOutcome:
    """PASS iff the checkers reproduce source HOLDS and target FAILS on the
    registered example, in agreement with its expected-verdict registry."""
    if edge.status != NOT_IMPLIES:
        raise ValueError("confirm_counterexample expects a negative edge")
    model = _model_for_example(edge.counterexample)
    out = EdgeOutcome(edge=edge, outcome="PASS")
    src = ctx.verdict(model, edge.src_mode())
    dst = ctx.verdict(model, edge.dst_mode())
    out.rows.append({
        "model": model.token,
        "from": src.verdict,
        "to": dst.verdict,
        "from_evidence": src.evidence,
        "to_evidence": dst.evidence,
    })
    expected = cx.example_expected_verdicts(
        cx.ExampleSpec(edge.counterexample)
        if edge.counterexample != "exa-3.4"
        else cx.ExampleSpec("exa-3.4")
    )
    registered = {c.mode: c.expected for c in expected.claims}
    problems = []
    if src.verdict != HOLDS:
        problems.append(f"source {edge.src} came out {src.verdict}, expected HOLDS")
    if dst.verdict != FAILS:
        problems.append(f"target {edge.dst} came out {dst.verdict}, expected FAILS")
    for mode, verdict in ((edge.src, src.verdict), (edge.dst, dst.verdict)):
        if mode in registered and registered[mode] != verdict:
            problems.append(
                f"checker verdict {verdict} for {mode} contradicts the registered claim "
                f"{registered[mode]}"
            )
    if problems:
        out.outcome = "FAIL"
        out.note = "; ".join(problems)
        out.violations.append(model.token)
        out.rows.append({"evidence-dump": {"from": src.to_payload(), "to": dst.to_payload()}})
    else:
        out.witnesses.append(model.token)
    return out


# -- composition checks ------------------------------------------------------------


def slutsky_compose(
    x_model: SequenceModel,
    y_model: SequenceModel,
    op: str,
    ctx: CheckContext | None = None,
) -> tuple[ComposedModel, ModeVerdict]:
    """Build a composition and certify that the test-function series still sums.

    Hypotheses are enforced before composing: the first operand must satisfy
    the summable test-function mode, the second the summable first-moment
    mode toward a constant; products need a bounded first operand, quotients
    additionally a nonzero limit for the second.
    """
    ctx = ctx or CheckContext()
    x_verdict = ctx.verdict(x_model, ConvergenceMode("s1-d"))
    if x_verdict.verdict != HOLDS:
        raise ValueError("hypothesis violated: the first operand is not summable in the "
                         "test-function distance")
    y_verdict = ctx.verdict(y_model, ConvergenceMode("s-lp", p=1.0))
    if y_verdict.verdict != HOLDS:
        raise ValueError("hypothesis violated: the second operand is not summable in the "
                         "first-moment distance")
    if y_model.limit.constant is None:
        raise ValueError("hypothesis violated: the second operand must converge to a constant")
    if op in ("product", "quotient") and not x_model.is_bounded:
        raise ValueError(f"hypothesis violated: {op} composition requires a bounded first operand")
    if op == "quotient" and y_model.limit.constant == 0.0:
        raise ValueError("hypothesis violated: quotient composition requires a nonzero limit "
                         "for the second operand")
    composed = ComposedModel(op, x_model, y_model)
    verdict = ctx.verdict(composed, ConvergenceMode("s1-d"))
    return composed, verdict


def _slutsky_default_cases() -> list[tuple[str, SequenceModel, SequenceModel]]:
    bounded = IidCopiesModel(parse_distribution("normal(0,1)[-3,3]"))
    drift = DriftModel(center=2.0, rate=parse_rate("inv-n2"))
    return [("sum", bounded, drift), ("product", bounded, drift), ("quotient", bounded, drift)]


# -- the full matrix ---------------------------------------------------------------


@dataclass
class RelationReport:
    seed: int
    corpus: list[str]
    edge_outcomes: list[EdgeOutcome]
    equivalence_rows: list[dict]
    slutsky_rows: list[dict]
    density_route_rows: list[dict]
    open_notes: list[str]
    matrix: dict[tuple[str, str], str]
    ok: bool
    failures: list[str]

    def to_payload(self) -> dict:
        return {
            "seed": self.seed,
            "corpus": self.corpus,
            "ok": self.ok,
            "failures": self.failures,
            "edges": [o.to_payload() for o in self.edge_outcomes],
            "constant_limit_equivalence": self.equivalence_rows,
            "slutsky_compositions": self.slutsky_rows,
            "bounded_density_route": self.density_route_rows,
            "open_notes": self.open_notes,
            "matrix_modes": list(MATRIX_MODES),
            "matrix": {f"{a}->{b}": v for (a, b), v in sorted(self.matrix.items())},
        }


def _matrix_cells(registry: RelationRegistry) -> dict[tuple[str, str], str]:
    direct = {(e.src, e.dst) for e in registry.edges if e.status == IMPLIES and e.scope == "general"}
    closure = set(direct)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c in MATRIX_MODES:
                if (b, c) in closure and (a, c) not in closure and a != c:
                    closure.add((a, c))
                    changed = True
    cells: dict[tuple[str, str], str] = {}
    for a in MATRIX_MODES:
        for b in MATRIX_MODES:
            if a == b:
                cells[(a, b)] = "SELF"
            elif (a, b) in direct:
                cells[(a, b)] = "IMPLIES"
            elif (a, b) in closure:
                cells[(a, b)] = "IMPLIES_VIA_CLOSURE"
            else:
                cells[(a, b)] = "UNADDRESSED"
    for e in registry.edges:
        if e.status == NOT_IMPLIES:
            cells[(e.src, e.dst)] = "NOT_IMPLIES"
        elif e.status == OPEN and cells.get((e.src, e.dst)) == "UNADDRESSED":
            cells[(e.src, e.dst)] = "OPEN"
        elif e.status == IMPLIES and e.scope != "general" and cells.get((e.src, e.dst)) == "UNADDRESSED":
            cells[(e.src, e.dst)] = f"IMPLIES_{e.scope.replace('-', '_').upper()}"
    return cells


def full_relation_matrix(
    seed: int = 1,
    *,
    corpus: list[SequenceModel] | None = None,
    config: CheckConfig | None = None,
) -> RelationReport:
    """Run every edge of the registry over the corpus and assemble the report."""
    registry = build_registry()
    registry_closure_check(registry)
    if config is None:
        config = CheckConfig(rng=RngStream(seed, 0))
    ctx = CheckContext(config=config)
    corpus = corpus if corpus is not None else default_corpus()

    failures: list[str] = []
    outcomes: list[EdgeOutcome] = []
    for edge in registry.edges:
        if edge.status == IMPLIES:
            outcome = verify_implication(edge, corpus, ctx)
            if outcome.outcome == "PASS" and not outcome.witnesses:
                outcome.outcome = "FAIL"
                outcome.note = "no non-vacuous witness in the corpus"
            if outcome.outcome != "PASS":
                failures.append(f"{edge.describe()}: {outcome.note}")
        elif edge.status == NOT_IMPLIES:
            outcome = confirm_counterexample(edge, ctx)
            if outcome.outcome != "PASS":
                failures.append(f"{edge.describe()}: {outcome.note}")
        else:
            outcome = EdgeOutcome(edge=edge, outcome="SKIPPED", note=edge.citation)
        outcomes.append(outcome)

    # constant-limit equivalence of the two series modes, both directions
    equivalence_rows = []
    for model in corpus:
        if not model.limit.is_constant:
            continue
        s2d = ctx.verdict(model, ConvergenceMode("s2-d"))
        cc = ctx.verdict(model, ConvergenceMode("cc"))
        consistent = s2d.verdict == cc.verdict
        equivalence_rows.append({
            "model": model.token,
            "s2-d": s2d.verdict,
            "cc": cc.verdict,
            "consistent": consistent,
        })
        if not consistent:
            failures.append(
                f"constant-limit equivalence broken on {model.token}: "
                f"s2-d={s2d.verdict}, cc={cc.verdict}"
            )

    # compositions: the three operations plus the rejected zero-limit quotient
    slutsky_rows = []
    for op, x_model, y_model in _slutsky_default_cases():
        composed, verdict = slutsky_compose(x_model, y_model, op, ctx)
        slutsky_rows.append({
            "op": op,
            "composed": composed.token,
            "limit": composed.limit.token,
            "verdict": verdict.verdict,
        })
        if verdict.verdict != HOLDS:
            failures.append(f"slutsky {op} composition came out {verdict.verdict}")
    try:
        slutsky_compose(
            IidCopiesModel(parse_distribution("normal(0,1)[-3,3]")),
            DriftModel(center=0.0, rate=parse_rate("inv-n2")),
            "quotient",
            ctx,
        )
        failures.append("zero-limit quotient was not rejected")
        slutsky_rows.append({"op": "quotient", "rejected": False})
    except ValueError as exc:
        slutsky_rows.append({"op": "quotient-zero-limit", "rejected": True, "reason": str(exc)})

    # bounded-density route to the distribution-function series
    density_rows = []
    for model in (
        ShiftedLimitModel(parse_distribution("normal"), parse_rate("inv-n3")),
    ):
        diag = log_weight_tail_series(model, beta=1.0, delta=1.0, horizon=config.horizon)
        s2d = ctx.verdict(model, ConvergenceMode("s2-d"))
        consistent = not (
            diag.verdict is Verdict.CONVERGENT
            and model.limit.has_bounded_density
            and s2d.verdict != HOLDS
        )
        density_rows.append({
            "model": model.token,
            "weighted_tail_series": diag.verdict.value,
            "s2-d": s2d.verdict,
            "consistent": consistent,
        })
        if not consistent:
            failures.append(f"bounded-density route broken on {model.token}")

    registry_notes = list(build_registry().open_notes)
    return RelationReport(
        seed=seed,
        corpus=[m.token for m in corpus],
        edge_outcomes=outcomes,
        equivalence_rows=equivalence_rows,
        slutsky_rows=slutsky_rows,
        density_route_rows=density_rows,
        open_notes=registry_notes,
        matrix=_matrix_cells(registry),
        ok=not failures,
        failures=failures,
    )
