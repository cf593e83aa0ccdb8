"""One checker per convergence mode, plus the subsequence extractor.

Series-defined modes (summable tails, moments, sup norms, test-function and
distribution-function distances) reduce to series diagnostics and inherit
their exact/heuristic split.  The plain limit modes (a.s., in probability,
L^p, L^inf, in distribution) are decided exactly where the model knows the
answer in closed form and by documented finite-horizon trend heuristics
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import UnsupportedQuery
from .models import LimitSpec, SequenceModel
from .rng import RngStream
from .series import (
    SeriesDiagnostic,
    Verdict,
    diagnose_analytic_series,
    diagnose_empirical_series,
    fit_tail_exponent,
)

__all__ = [
    "MODE_TOKENS",
    "ConvergenceMode",
    "ModeVerdict",
    "RampFunction",
    "TestFunctionFamily",
    "CheckConfig",
    "check_mode",
    "s1d_series",
    "s2d_series",
    "log_weight_tail_series",
    "extract_strong_subsequence",
    "ExtractionStalled",
    "default_eval_points",
    "fit_tail_exponent",
]

HOLDS = "HOLDS"
FAILS = "FAILS"
INCONCLUSIVE = "INCONCLUSIVE"

MODE_TOKENS = (
    "as", "in-prob", "lp", "linf", "in-dist",
    "cc", "s-lp", "s-linf", "s-alpha-as", "s1-d", "s2-d",
)

_SERIES_MODES = ("cc", "s-lp", "s-linf", "s-alpha-as", "s1-d", "s2-d")


@dataclass(frozen=True)
class ConvergenceMode:
    """A mode tag with its order parameter where one applies."""

    tag: str
    p: float | None = None
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.tag not in MODE_TOKENS:
            raise ValueError(f"unknown mode tag {self.tag!r}")
        if self.tag in ("lp", "s-lp"):
            if self.p is None or not self.p > 0:
                raise ValueError(f"mode {self.tag} requires p > 0")
        if self.tag == "s-alpha-as":
            if self.alpha is None or not self.alpha > 0:
                raise ValueError("mode s-alpha-as requires alpha > 0")

    @property
    def token(self) -> str:
        return self.tag

    def params(self) -> dict:
        out: dict[str, float] = {}
        if self.p is not None:
            out["p"] = self.p
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out

    def describe(self) -> str:
        ps = ",".join(f"{k}={v:g}" for k, v in self.params().items())
        return f"{self.tag}[{ps}]" if ps else self.tag

    @staticmethod
    def parse(token: str, p: float | None = None, alpha: float | None = None) -> "ConvergenceMode":
        return ConvergenceMode(token.strip().lower(), p=p, alpha=alpha)


@dataclass
class ModeVerdict:
    """Outcome of one mode check on one model."""

    mode: str
    params: dict
    verdict: str
    method: str  # "analytic" | "monte-carlo"
    evidence: str
    flags: tuple[str, ...] = ()
    seed: int | None = None
    diagnostics: list = field(default_factory=list, repr=False)

    def to_payload(self) -> dict:
        return {
            "mode": self.mode,
            "params": self.params,
            "verdict": self.verdict,
            "method": self.method,
            "evidence": self.evidence,
            "flags": list(self.flags),
            "seed": self.seed,
        }


def _series_verdict(v: Verdict) -> str:
    return {Verdict.CONVERGENT: HOLDS, Verdict.DIVERGENT: FAILS, Verdict.INCONCLUSIVE: INCONCLUSIVE}[v]


def worst_verdict(verdicts: Sequence[str]) -> str:
    if FAILS in verdicts:
        return FAILS
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLDS


# -- bounded Lipschitz test functions ----------------------------------------


@dataclass(frozen=True)
class RampFunction:
    """clamp((x - center) / width, -1, 1): sup-norm 1, Lipschitz 1/width."""

    center: float
    width: float

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError("width must be positive")

    def __call__(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.center) / self.width, -1.0, 1.0)

    @property
    def lipschitz(self) -> float:
        return 1.0 / self.width

    @property
    def label(self) -> str:
        return f"ramp(a={self.center:g},s={self.width:g})"


_DEFAULT_WIDTHS = (1.0, 0.25, 0.0625)
_ANCHOR_LEVELS = 21


@dataclass(frozen=True)
class TestFunctionFamily:
    __test__ = False  # not a test case, despite the name

    members: tuple[RampFunction, ...]

    @staticmethod
    def default_for(limit: LimitSpec,
                    widths: tuple[float, ...] = _DEFAULT_WIDTHS) -> "TestFunctionFamily":
        """Ramps at quantile anchors of the limit, one per (anchor, width)."""
        levels = np.linspace(0.025, 0.975, _ANCHOR_LEVELS)
        centers = np.unique(np.asarray(limit.quantile(levels), dtype=float))
        members = tuple(
            RampFunction(float(a), float(s)) for s in widths for a in centers
        )
        return TestFunctionFamily(members)

    def extended(self, extra: Sequence[RampFunction]) -> "TestFunctionFamily":
        return TestFunctionFamily(self.members + tuple(extra))


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class CheckConfig:
    """Knobs shared by the checkers; defaults are documented and stable."""

    horizon: int = 20_000
    eps_grid: tuple[float, ...] = (0.5, 0.1)
    rng: RngStream | None = None
    paths: int = 200
    path_horizon: int = 100_000
    cauchy_tolerance: float = 0.01
    pass_fraction: float = 0.95
    mc_reps: int = 2_000
    mc_horizon: int = 4_096


# -- family and distribution-distance series ----------------------------------


@dataclass
class FamilySeriesReport:
    """Worst-case verdict over a family of per-member series."""

    overall: Verdict
    worst_label: str
    members: dict[str, SeriesDiagnostic]
    flags: tuple[str, ...] = ()

    @property
    def worst(self) -> SeriesDiagnostic:
        return self.members[self.worst_label]

    def to_payload(self) -> dict:
        return {
            "overall": self.overall.value,
            "worst_member": self.worst_label,
            "flags": list(self.flags),
            "members": {k: d.to_payload() for k, d in self.members.items()},
        }


def _worst_series(members: dict[str, SeriesDiagnostic]) -> tuple[Verdict, str]:
    order = {Verdict.DIVERGENT: 0, Verdict.INCONCLUSIVE: 1, Verdict.CONVERGENT: 2}
    label = min(members, key=lambda k: (order[members[k].verdict], k))
    return members[label].verdict, label


def s1d_series(
    model: SequenceModel,
    family: TestFunctionFamily | None = None,
    horizon: int = 20_000,
    *,
    rng: RngStream | None = None,
    reps: int = 2_000,
) -> FamilySeriesReport:
    """Per test function, the series of |E f(X_n) - E f(X)|; worst case wins.

    Analytic when the model exposes exact ramp gaps; otherwise Monte Carlo
    with a per-term precision flag (standard error above a fifth of the term
    magnitude marks the member as low-precision).
    """
    if family is None:
        family = TestFunctionFamily.default_for(model.limit)
    members: dict[str, SeriesDiagnostic] = {}
    flags: tuple[str, ...] = ()
    try:
        for ramp in family.members:
            form = model.s1d_domination_form(ramp.lipschitz)
            members[ramp.label] = diagnose_analytic_series(
                lambda ns, r=ramp: model.s1d_gap(ns, r.center, r.width),
                horizon,
                form=form,
                flags=("lipschitz-domination",) if form is not None else (),
            )
    except UnsupportedQuery:
        if not model.supports_sampling or rng is None:
            raise
        members, flags = _s1d_monte_carlo(model, family, rng, reps)
    overall, worst = _worst_series(members)
    return FamilySeriesReport(overall=overall, worst_label=worst, members=members, flags=flags)


def _s1d_monte_carlo(model, family, rng, reps):
    horizon = 4_096
    sums = {ramp.label: np.zeros(horizon) for ramp in family.members}
    sq_sums = {ramp.label: np.zeros(horizon) for ramp in family.members}
    block = max(1, 10_000_000 // horizon)
    done = 0
    while done < reps:
        take = min(block, reps - done)
        rows = np.empty((take, horizon))
        for i in range(take):
            gen = rng.substream(done + i).generator()
            rows[i] = model.sample_values(horizon, gen)
        for ramp in family.members:
            fx = ramp(rows)
            sums[ramp.label] += fx.sum(axis=0)
            sq_sums[ramp.label] += (fx * fx).sum(axis=0)
        done += take
    members: dict[str, SeriesDiagnostic] = {}
    grid = np.unique(np.concatenate([2 ** np.arange(0, int(math.log2(horizon)) + 1), [horizon]]))
    low_precision = False
    for ramp in family.members:
        mean = sums[ramp.label] / reps
        var = np.maximum(sq_sums[ramp.label] / reps - mean**2, 0.0)
        se = np.sqrt(var / reps)
        at_limit = float(model.limit.distribution.ramp_expectation(ramp.center, ramp.width))
        terms = np.abs(mean - at_limit)
        mask = se[grid - 1] >= np.maximum(terms[grid - 1], 1e-300) / 5.0
        if mask.any():
            low_precision = True
        members[ramp.label] = diagnose_empirical_series(
            grid, terms[grid - 1], horizon, std_errs=se[grid - 1],
            flags=("low-precision",) if mask.any() else (),
        )
    return members, (("low-precision",) if low_precision else ())


def default_eval_points(limit: LimitSpec, count: int = _ANCHOR_LEVELS) -> np.ndarray:
    """Evaluation points for distribution-function series.

    Continuous limits get quantiles of the body; limits with atoms get
    symmetric offsets around each atom, so discontinuities are avoided by
    construction.
    """
    atoms = limit.atoms()
    if not atoms:
        levels = np.linspace(0.025, 0.975, count)
        return np.unique(np.asarray(limit.quantile(levels), dtype=float))
    offsets = np.array([0.05, 0.1, 0.2, 0.4, 0.8, 1.6])
    points: list[float] = []
    atom_values = [a for a, _ in atoms]
    for a in atom_values:
        for off in offsets:
            points.extend((a - off, a + off))
    return np.unique([p for p in points if all(abs(p - a) > 1e-12 for a in atom_values)])


def s2d_series(
    cdf_fn: Callable[[np.ndarray, float], np.ndarray],
    limit_cdf: Callable[[float], float],
    eval_points: Sequence[float],
    horizon: int = 20_000,
    *,
    atoms: Sequence[float] = (),
) -> FamilySeriesReport:
    """Per evaluation point, the series of |F_n(x) - F(x)|; worst case wins.

    Only analytic distribution functions are accepted; empirical CDFs are a
    non-goal.  Points sitting on a discontinuity of the limit are rejected.
    """
    members: dict[str, SeriesDiagnostic] = {}
    for x in eval_points:
        for a in atoms:
            if abs(x - a) <= 1e-12:
                raise ValueError(f"evaluation point {x!r} sits on a discontinuity of the limit")
        fx = float(limit_cdf(x))
        members[f"x={x:g}"] = diagnose_analytic_series(
            lambda ns, x=x, fx=fx: np.abs(cdf_fn(ns, x) - fx), horizon
        )
    overall, worst = _worst_series(members)
    return FamilySeriesReport(overall=overall, worst_label=worst, members=members)


def s2d_series_for_model(
    model: SequenceModel,
    eval_points: Sequence[float] | None = None,
    horizon: int = 20_000,
) -> FamilySeriesReport:
    if eval_points is None:
        eval_points = default_eval_points(model.limit)
    return s2d_series(
        model.marginal_cdf,
        lambda x: float(model.limit.cdf(x)),
        eval_points,
        horizon,
        atoms=[a for a, _ in model.limit.atoms()],
    )


def log_weight_tail_series(
    model: SequenceModel, beta: float, delta: float, horizon: int = 20_000
) -> SeriesDiagnostic:
    """The series of P(n (log n)^(1+beta) |X_n - X| >= delta).

    Convergence of this series together with a bounded limit density is the
    registered sufficient route to a summable distribution-function distance.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")

    def terms(ns: np.ndarray) -> np.ndarray:
        nsf = ns.astype(float)
        factor = nsf * np.log(nsf) ** (1.0 + beta)
        out = np.zeros_like(nsf)
        live = factor > 0
        if live.any():
            out[live] = model.deviation_tail(ns[live], delta / factor[live])
        return out

    return diagnose_analytic_series(terms, horizon)


# -- subsequence extraction ----------------------------------------------------


class ExtractionStalled(RuntimeError):
    def __init__(self, k: int, cap: int):
        super().__init__(
            f"could not certify the tail bound for k={k} before the index cap {cap}"
        )
        self.k = k
        self.cap = cap


def extract_strong_subsequence(
    model: SequenceModel | None,
    alpha: float,
    k_max: int,
    *,
    probe: Callable[[np.ndarray, float], np.ndarray] | None = None,
    index_cap: int = 10**8,
    block: int = 8_192,
) -> np.ndarray:
    """Greedy strictly increasing indices n'_k with
    P(|X_{n'_k} - X|^alpha >= 1/k^2) <= 1/k^2 (plus the probe's precision).

    Each n'_k is the smallest qualifying index above its predecessor, the
    canonical deterministic witness.  ``probe(ns, t)`` must return
    P(|X_n - X| >= t) for a vector of indices; it defaults to the model's
    analytic deviation tail.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if probe is None:
        if model is None:
            raise ValueError("either a model or a probe is required")
        probe = model.deviation_tail
    precision = float(getattr(probe, "precision", 0.0))

    indices = np.empty(k_max, dtype=np.int64)
    previous = 0
    for k in range(1, k_max + 1):
        bound = 1.0 / k**2
        threshold = bound ** (1.0 / alpha)
        n = previous + 1
        found = -1
        while n <= index_cap:
            hi = min(n + block - 1, index_cap)
            ns = np.arange(n, hi + 1, dtype=np.int64)
            ok = np.asarray(probe(ns, threshold)) <= bound + precision
            if ok.any():
                found = int(ns[int(np.argmax(ok))])
                break
            n = hi + 1
        if found < 0:
            raise ExtractionStalled(k, index_cap)
        indices[k - 1] = found
        previous = found
    return indices


def monte_carlo_tail_probe(model: SequenceModel, rng: RngStream, reps: int, horizon: int):
    """Tail-probability probe estimated once over shared sample paths.

    Only constant-limit models are supported; the probe's ``precision``
    attribute is the binomial scale 1/sqrt(reps) used in the extractor bound.
    """
    c = model.limit.constant
    if c is None:
        raise UnsupportedQuery("the Monte Carlo probe needs a constant limit")
    deviations = np.empty((reps, horizon))
    for r in range(reps):
        deviations[r] = np.abs(model.sample_values(horizon, rng.substream(r).generator()) - c)

    def probe(ns: np.ndarray, t: float) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        if np.any(ns > horizon):
            raise ExtractionStalled(0, horizon)
        return (deviations[:, ns - 1] >= t).mean(axis=0)

    probe.precision = 1.0 / math.sqrt(reps)
    return probe


# -- trend heuristics -----------------------------------------------------------


def _trend_grid(horizon: int) -> np.ndarray:
    ns = [2**j for j in range(0, horizon.bit_length()) if 2**j <= horizon]
    if ns[-1] != horizon:
        ns.append(horizon)
    return np.asarray(ns, dtype=np.int64)


def _vanishing_trend(values: np.ndarray) -> tuple[str, str]:
    """Finite-horizon heuristic for 'does this sequence tend to zero'."""
    v = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(v)):
        return FAILS, "values are not finite"
    if np.all(v == 0.0):
        return HOLDS, "identically zero"
    quarter = max(1, len(v) // 4)
    head = float(v[:quarter].max())
    tail = float(v[-quarter:].max())
    if tail == 0.0:
        return HOLDS, "reaches zero within the horizon"
    if head == 0.0:
        return INCONCLUSIVE, "values appear after a zero prefix"
    ratio = tail / head
    if ratio <= 0.2:
        return HOLDS, f"tail/head ratio {ratio:.3g} (heuristic trend)"
    if ratio >= 0.8:
        return FAILS, f"stagnates at a positive level (ratio {ratio:.3g})"
    return INCONCLUSIVE, f"ambiguous trend (ratio {ratio:.3g})"


# -- the dispatcher --------------------------------------------------------------


def check_mode(
    model: SequenceModel,
    mode: ConvergenceMode,
    config: CheckConfig = CheckConfig(),
) -> ModeVerdict:
    """Dispatch one mode check; analytic wherever the model allows it."""
    tag = mode.tag
    seed = config.rng.seed if config.rng is not None else None

    def made(verdict, method, evidence, flags=(), diagnostics=()):
        return ModeVerdict(
            mode=tag, params=mode.params(), verdict=verdict, method=method,
            evidence=evidence, flags=tuple(flags), seed=seed,
            diagnostics=list(diagnostics),
        )

    if tag == "s-lp":
        try:
            diag = diagnose_analytic_series(
                lambda ns: model.deviation_moment(ns, mode.p),
                config.horizon,
                form=model.moment_series_form(mode.p),
            )
        except UnsupportedQuery:
            diag = _iid_mean_moment_series(model, mode.p, config)
            return made(_series_verdict(diag.verdict), "monte-carlo", diag.evidence,
                        diag.flags, [diag])
        return made(_series_verdict(diag.verdict), "analytic", diag.evidence,
                    diag.flags, [diag])

    if tag == "s-linf":
        try:
            diag = diagnose_analytic_series(
                lambda ns: model.deviation_sup(ns),
                config.horizon,
                form=model.sup_series_form(),
            )
        except UnsupportedQuery:
            raise UnsupportedQuery(
                "essential suprema are not estimable from finite samples; "
                f"{model.token} provides no analytic bound"
            ) from None
        return made(_series_verdict(diag.verdict), "analytic", diag.evidence,
                    diag.flags, [diag])

    if tag == "cc":
        diags = {}
        method = "analytic"
        for eps in config.eps_grid:
            try:
                diags[eps] = diagnose_analytic_series(
                    lambda ns, e=eps: model.deviation_tail(ns, e),
                    config.horizon,
                    form=model.tail_series_form(eps),
                )
            except UnsupportedQuery:
                diags[eps] = _iid_mean_tail_series(model, eps, config)
                method = "monte-carlo"
        verdict = worst_verdict([_series_verdict(d.verdict) for d in diags.values()])
        worst_eps = min(
            diags, key=lambda e: {FAILS: 0, INCONCLUSIVE: 1, HOLDS: 2}[_series_verdict(diags[e].verdict)]
        )
        return made(
            verdict, method,
            f"worst case over eps grid {config.eps_grid}: {diags[worst_eps].evidence}",
            diags[worst_eps].flags, list(diags.values()),
        )

    if tag == "s1-d":
        report = s1d_series(model, horizon=config.horizon, rng=config.rng, reps=config.mc_reps)
        verdict = _series_verdict(report.overall)
        flags = report.flags
        method = "monte-carlo" if "low-precision" in flags or report.worst.source == "empirical" else "analytic"
        if verdict == HOLDS:
            flags = flags + ("family-limited",)  # a finite family certifies FAILS exactly, HOLDS heuristically
        return made(verdict, method,
                    f"worst member {report.worst_label}: {report.worst.evidence}",
                    flags, [report.worst])

    if tag == "s2-d":
        report = s2d_series_for_model(model, horizon=config.horizon)
        return made(_series_verdict(report.overall), "analytic",
                    f"worst point {report.worst_label}: {report.worst.evidence}",
                    report.flags, [report.worst])

    if tag == "s-alpha-as":
        analysis = model.strong_as_analysis(mode.alpha)
        if analysis is not None:
            verdict, reason = analysis
            return made(verdict, "analytic", reason)
        return _strong_as_monte_carlo(model, mode.alpha, config, made)

    if tag == "as":
        analysis = model.pointwise_limit_analysis()
        if analysis is not None:
            verdict, reason = analysis
            return made(verdict, "analytic", reason)
        return _as_monte_carlo(model, config, made)

    if tag == "in-prob":
        answers = [model.tail_limit_zero(eps) for eps in config.eps_grid]
        if all(a is not None for a in answers):
            verdict = HOLDS if all(answers) else FAILS
            return made(verdict, "analytic", "exact tail limit statement")
        return _tail_trend(model, config, made)

    if tag == "lp":
        answer = model.moment_limit_zero(mode.p)
        if answer is not None:
            return made(HOLDS if answer else FAILS, "analytic", "exact moment limit statement")
        grid = _trend_grid(config.horizon)
        values = np.asarray(model.deviation_moment(grid, mode.p), dtype=float)
        verdict, why = _vanishing_trend(values)
        return made(verdict, "analytic", f"moment trend: {why}", ("heuristic-trend",))

    if tag == "linf":
        answer = model.sup_limit_zero()
        if answer is not None:
            return made(HOLDS if answer else FAILS, "analytic", "exact sup-norm limit statement")
        grid = _trend_grid(config.horizon)
        values = np.asarray(model.deviation_sup(grid), dtype=float)
        verdict, why = _vanishing_trend(values)
        return made(verdict, "analytic", f"sup-norm trend: {why}", ("heuristic-trend",))

    if tag == "in-dist":
        answer = model.cdf_gap_limit_zero()
        if answer is not None:
            return made(HOLDS if answer else FAILS, "analytic",
                        "exact distribution-function limit statement")
        grid = _trend_grid(config.horizon)
        points = default_eval_points(model.limit)
        gaps = np.zeros(len(grid))
        for x in points:
            gaps = np.maximum(gaps, np.abs(model.marginal_cdf(grid, float(x)) - float(model.limit.cdf(x))))
        verdict, why = _vanishing_trend(gaps)
        return made(verdict, "analytic", f"distribution-gap trend: {why}", ("heuristic-trend",))

    raise ValueError(f"unhandled mode {tag!r}")


def _tail_trend(model, config, made):
    grid = _trend_grid(config.horizon)
    verdicts, reasons = [], []
    for eps in config.eps_grid:
        values = np.asarray(model.deviation_tail(grid, eps), dtype=float)
        verdict, why = _vanishing_trend(values)
        verdicts.append(verdict)
        reasons.append(f"eps={eps:g}: {why}")
    return made(worst_verdict(verdicts), "analytic",
                "tail trend, " + "; ".join(reasons), ("heuristic-trend",))


def _strong_as_monte_carlo(model, alpha, config, made):
    """Per-path partial sums with a tail-increment (Cauchy) rule."""
    if config.rng is None:
        raise UnsupportedQuery(f"{model.token}: strong-a.s. check needs a stream for sampling")
    c = model.limit.constant
    if c is None or not model.supports_sampling:
        raise UnsupportedQuery(f"{model.token}: no analytic route and no constant-limit sampling route")
    horizon = config.path_horizon
    checkpoint = max(1, horizon // 10)
    increments = np.empty(config.paths)
    for r in range(config.paths):
        values = model.sample_values(horizon, config.rng.substream(r).generator())
        terms = np.abs(values - c) ** alpha
        totals = np.cumsum(terms)
        increments[r] = totals[-1] - totals[checkpoint - 1]
    settled = float((increments < config.cauchy_tolerance).mean())
    evidence = (
        f"tail increment T_{horizon} - T_{checkpoint} < {config.cauchy_tolerance:g} "
        f"on {settled:.1%} of {config.paths} paths"
    )
    if settled >= config.pass_fraction:
        return made(HOLDS, "monte-carlo", evidence, ("heuristic-paths",))
    if settled <= 1.0 - config.pass_fraction:
        return made(FAILS, "monte-carlo", evidence, ("heuristic-paths",))
    return made(INCONCLUSIVE, "monte-carlo", evidence, ("heuristic-paths",))


def _as_monte_carlo(model, config, made):
    if config.rng is None:
        raise UnsupportedQuery(f"{model.token}: almost-sure check needs a stream for sampling")
    c = model.limit.constant
    if c is None or not model.supports_sampling:
        raise UnsupportedQuery(f"{model.token}: no analytic route and no constant-limit sampling route")
    horizon = config.path_horizon
    half = horizon // 2
    tail_sup = np.empty(config.paths)
    mid_sup = np.empty(config.paths)
    for r in range(config.paths):
        values = np.abs(model.sample_values(horizon, config.rng.substream(r).generator()) - c)
        tail_sup[r] = values[half:].max()
        mid_sup[r] = values[half // 2 : half].max()
    settled = float((tail_sup < config.cauchy_tolerance).mean())
    if settled >= config.pass_fraction:
        return made(HOLDS, "monte-carlo",
                    f"tail sup below {config.cauchy_tolerance:g} on {settled:.1%} of paths",
                    ("heuristic-paths",))
    stagnant = float((tail_sup >= 0.8 * mid_sup).mean())
    if stagnant >= config.pass_fraction:
        return made(FAILS, "monte-carlo",
                    f"tail sup does not shrink on {stagnant:.1%} of paths",
                    ("heuristic-paths",))
    return made(INCONCLUSIVE, "monte-carlo", "mixed path behaviour", ("heuristic-paths",))
