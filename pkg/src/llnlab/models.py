"""Sequence models: declarative descriptions of a random sequence and its limit.

Five constructible kinds plus a probe-only one:

* ``iid-mean``   running means S_n/n of fresh draws, limit = the mean
* ``iid-copies`` fresh draws from one marginal, limit = an independent copy
* ``shifted``    X + r(n) for a single draw X, limit = X
* ``scaled``     C + Z * r(n) for a single noise draw Z, limit = C
* ``drift``      C + r(n) deterministic (``const`` when r = 0), limit = C
* ``composed``   sum / product / quotient of an iid-copies operand with a
  deterministic one (built programmatically, not parsed)
* ``powtail``    a pure analytic tail probe, P(|X_n - X| >= t) given in
  closed form; it cannot be sampled

``shifted``, ``scaled`` and the named counterexamples are all measurable
functions of one uniform omega in (0, 1), so a path is a single draw pushed
through the sequence.  Every model is immutable and safe to share across
workers.

Token grammar (CLI and config files), keys joined with commas::

    iid-mean:dist=normal            iid-copies:dist=normal(0,1)[-3,3]
    exa-3.1   exa-3.2:alpha=1   exa-3.3:alpha=2   exa-3.4:dist=normal
    shifted:base=normal,rate=inv-n2     scaled:center=0,noise=cauchy,rate=inv-sqrt
    drift:center=0.5,rate=inv-n2        const:center=1
    powtail:coef=1,rho=0.5

Rates: ``inv-n`` (1/n), ``inv-n2``, ``inv-n3``, ``inv-sqrt``, ``inv-log``
(1/log(n+1)), ``zero``, or ``pow-<beta>`` for n**-beta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import counterexamples as cx
from .distributions import DistributionSpec, Family, UnsupportedQuery, parse_distribution
from .rng import RngStream
from .series import SeriesForm, Verdict

__all__ = [
    "ModelKind",
    "RateSpec",
    "LimitSpec",
    "PathSample",
    "SequenceModel",
    "IidMeanModel",
    "IidCopiesModel",
    "ShiftedLimitModel",
    "ScaledNoiseModel",
    "DriftModel",
    "ConstantModel",
    "CounterexampleModel",
    "PowerTailModel",
    "ComposedModel",
    "parse_model",
    "parse_rate",
    "sample_path",
]


class ModelKind(enum.Enum):
    IID_MEAN = "iid-mean"
    IID_COPIES = "iid-copies"
    EXPLICIT_SPACE = "explicit-space"
    DETERMINISTIC = "deterministic"
    COMPOSED = "composed"
    ANALYTIC_TAIL = "analytic-tail"


# -- deterministic rates ----------------------------------------------------


@dataclass(frozen=True)
class RateSpec:
    """Nonincreasing deterministic rate r(n) with known series exponents.

    ``power``/``log_power`` describe r(n) ~ n**-power * (log n)**-log_power,
    which makes sums of r(n)**q exact power-log comparisons.
    """

    token: str
    power: float
    log_power: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.token == "zero"

    def values(self, ns) -> np.ndarray:
        nsf = np.asarray(ns, dtype=float)
        if self.is_zero:
            return np.zeros_like(nsf)
        if self.token == "inv-log":
            return 1.0 / np.log(nsf + 1.0)
        return nsf**-self.power

    def threshold_cutoff(self, t: float) -> int | None:
        """Largest n with r(n) >= t; 0 when none, None when out of float range."""
        if not t > 0:
            raise ValueError("threshold must be positive")
        if self.is_zero:
            return 0
        if self.token == "inv-log":
            if 1.0 / t > 700.0:
                return None
            guess = max(int(math.exp(1.0 / t)) + 1, 1)
        else:
            try:
                guess = max(int(t ** (-1.0 / self.power)) + 1, 1)
            except OverflowError:
                return None
        r = lambda n: 1.0 / math.log(n + 1.0) if self.token == "inv-log" else float(n) ** -self.power
        while guess >= 1 and r(guess) < t:
            guess -= 1
        while r(guess + 1) >= t:
            guess += 1
        return guess

    def power_series_form(self, q: float, coefficient_positive: bool = True) -> SeriesForm:
        """Form of sum_n (c * r(n))**q for a positive coefficient c."""
        if self.is_zero or not coefficient_positive:
            return SeriesForm("zero")
        return SeriesForm("power", power=self.power * q, log_power=self.log_power * q)


_NAMED_RATES = {
    "inv-n": (1.0, 0.0),
    "inv-n2": (2.0, 0.0),
    "inv-n3": (3.0, 0.0),
    "inv-sqrt": (0.5, 0.0),
    "inv-log": (0.0, 1.0),
    "zero": (math.inf, 0.0),
}


def parse_rate(token: str) -> RateSpec:
    text = token.strip().lower()
    if text in _NAMED_RATES:
        power, log_power = _NAMED_RATES[text]
        return RateSpec(text, power, log_power)
    if text.startswith("pow-"):
        beta = float(text[4:])
        if not beta > 0:
            raise ValueError("pow-<beta> requires beta > 0")
        return RateSpec(text, beta)
    raise ValueError(f"unknown rate {token!r}")


# -- limits -----------------------------------------------------------------


@dataclass(frozen=True)
class LimitSpec:
    """The limit variable, always described by a distribution (a point mass
    for constant limits)."""

    distribution: DistributionSpec

    @property
    def constant(self) -> float | None:
        if self.distribution.family is Family.POINT_MASS:
            return self.distribution.loc
        return None

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def cdf(self, x):
        return self.distribution.cdf(x)

    def atoms(self) -> tuple[tuple[float, float], ...]:
        return self.distribution.atoms()

    def quantile(self, u):
        return self.distribution.quantile(u)

    @property
    def has_bounded_density(self) -> bool:
        return not self.distribution.atoms()

    @property
    def token(self) -> str:
        c = self.constant
        return f"const {c:g}" if c is not None else self.distribution.token


@dataclass(frozen=True)
class PathSample:
    """One realized trajectory with its provenance."""

    model_id: str
    seed: int
    stream_id: int
    horizon: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != self.horizon:
            raise ValueError("values length must equal the horizon")


# -- model base -------------------------------------------------------------


class SequenceModel:
    """Base for all sequence models.

    Analytic primitives have a default of ``UnsupportedQuery``; the limit
    statements (``*_limit_zero``) return None when no exact answer exists,
    in which case checkers fall back to heuristics or Monte Carlo.
    """

    kind: ModelKind
    limit: LimitSpec
    token: str

    supports_sampling = True

    # sampling
    def sample_values(self, horizon: int, generator: np.random.Generator) -> np.ndarray:
        raise UnsupportedQuery(f"{self.token} cannot be sampled")

    # series term primitives, vectorized over ns (t may be an array too)
    def deviation_tail(self, ns, t):
        raise UnsupportedQuery(f"{self.token}: no analytic deviation tail")

    def tail_series_form(self, eps: float) -> SeriesForm | None:
        return None

    def deviation_moment(self, ns, p: float):
        raise UnsupportedQuery(f"{self.token}: no analytic deviation moment")

    def moment_series_form(self, p: float) -> SeriesForm | None:
        return None

    def deviation_sup(self, ns):
        raise UnsupportedQuery(f"{self.token}: no analytic sup deviation")

    def sup_series_form(self) -> SeriesForm | None:
        return None

    # distributional route
    def marginal_cdf(self, ns, x):
        raise UnsupportedQuery(f"{self.token}: no analytic marginal distribution")

    def s1d_gap(self, ns, center: float, width: float):
        """|E f(X_n) - E f(X)| for the clamped ramp at (center, width)."""
        raise UnsupportedQuery(f"{self.token}: no analytic test-function gaps")

    def s1d_domination_form(self, lipschitz: float) -> SeriesForm | None:
        """A summable closed form dominating every ramp-gap series, if one is
        provable; used to certify convergence past floating-point noise."""
        return None

    # pathwise route (single-omega models)
    def path_deviation_terms(self, omega: float, ns, alpha: float):
        raise UnsupportedQuery(f"{self.token}: no pointwise path terms")

    def path_series_form(self, omega: float, alpha: float) -> SeriesForm | None:
        return None

    # exact convergence statements, None when unknown
    def strong_as_analysis(self, alpha: float) -> tuple[str, str] | None:
        return None

    def pointwise_limit_analysis(self) -> tuple[str, str] | None:
        return None

    def tail_limit_zero(self, eps: float) -> bool | None:
        return None

    def moment_limit_zero(self, p: float) -> bool | None:
        return None

    def sup_limit_zero(self) -> bool | None:
        return None

    def cdf_gap_limit_zero(self) -> bool | None:
        return None

    @property
    def is_bounded(self) -> bool:
        return False

    def __repr__(self) -> str:  # pragma: no cover
        return f"<{type(self).__name__} {self.token}>"


def _as_ns(ns) -> np.ndarray:
    arr = np.asarray(ns)
    if np.any(arr < 1):
        raise ValueError("indices must be at least 1")
    return arr.astype(float)


# -- iid running means ------------------------------------------------------


@dataclass(frozen=True, repr=False)
class IidMeanModel(SequenceModel):
    """X_n = S_n / n for fresh draws; the indexed partial sums live here."""

    dist: DistributionSpec

    kind = ModelKind.IID_MEAN

    @property
    def token(self) -> str:
        return f"iid-mean:dist={self.dist.token}"

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(DistributionSpec(Family.POINT_MASS, loc=self.dist.center()))

    @property
    def mean_exists(self) -> bool:
        return self.dist.mean() is not None

    def sample_values(self, horizon, generator):
        if self.dist.family is Family.POINT_MASS:
            # degenerate short circuit keeps S_n/n = mu exact in floating point
            return np.full(horizon, self.dist.loc)
        draws = self.dist.quantile(generator.random(horizon))
        return np.cumsum(draws) / np.arange(1, horizon + 1)

    def _is_normal(self) -> bool:
        return self.dist.family is Family.NORMAL and self.dist.truncation is None

    def deviation_tail(self, ns, t):
        nsf = _as_ns(ns)
        if self.dist.family is Family.POINT_MASS:
            return np.zeros_like(nsf)
        if self._is_normal():
            from scipy import special

            t = np.asarray(t, dtype=float)
            return special.erfc(t * np.sqrt(nsf) / (self.dist.scale * math.sqrt(2.0)))
        if self.dist.family is Family.CAUCHY:
            # stability: S_n/n - loc has the same distribution at every n
            t = np.asarray(t, dtype=float)
            centered = DistributionSpec(Family.CAUCHY, scale=self.dist.scale)
            return np.broadcast_to(centered.abs_tail(t), nsf.shape).copy()
        raise UnsupportedQuery(f"{self.token}: no closed-form mean-deviation tail")

    def tail_series_form(self, eps):
        if self.dist.family is Family.POINT_MASS:
            return SeriesForm("zero")
        if self.dist.family is Family.CAUCHY:
            centered = DistributionSpec(Family.CAUCHY, scale=self.dist.scale)
            return SeriesForm("constant", level=float(centered.abs_tail(eps)))
        return None

    def deviation_moment(self, ns, p):
        nsf = _as_ns(ns)
        if self.dist.family is Family.POINT_MASS:
            return np.zeros_like(nsf)
        if self._is_normal():
            m_p = DistributionSpec(Family.NORMAL, scale=self.dist.scale).abs_moment(p)
            return m_p * nsf ** (-p / 2.0)
        if self.dist.family is Family.RADEMACHER and p == 2.0:
            return self.dist.scale**2 / nsf
        raise UnsupportedQuery(f"{self.token}: no closed-form mean deviation moment")

    def moment_series_form(self, p):
        if self.dist.family is Family.POINT_MASS:
            return SeriesForm("zero")
        if self._is_normal() or (self.dist.family is Family.RADEMACHER and p == 2.0):
            return SeriesForm("power", power=p / 2.0)
        return None

    def strong_as_analysis(self, alpha):
        if self.dist.family is Family.POINT_MASS:
            return "HOLDS", "degenerate draws give a zero series"
        form = self.moment_series_form(alpha)
        if form is not None and form.verdict().value == "CONVERGENT":
            return "HOLDS", "summable alpha-th moments dominate the path series"
        return None

    def pointwise_limit_analysis(self):
        if self.dist.family is Family.POINT_MASS:
            return "HOLDS", "degenerate draws"
        if self.mean_exists:
            return "HOLDS", "the strong law for integrable draws"
        if self.dist.family is Family.CAUCHY:
            return "FAILS", "stability keeps the running mean fully spread at every n"
        return None

    def tail_limit_zero(self, eps):
        if self.dist.family is Family.POINT_MASS:
            return True
        if self.mean_exists:
            return True  # the weak law for finite-mean draws
        if self.dist.family is Family.CAUCHY:
            return False  # stability: the deviation distribution never shrinks
        return None

    def moment_limit_zero(self, p):
        if self.dist.family is Family.POINT_MASS:
            return True
        if self._is_normal() or (self.dist.family is Family.RADEMACHER and p == 2.0):
            return True
        if self.dist.family is Family.CAUCHY:
            return False
        return None

    @property
    def is_bounded(self) -> bool:
        return self.dist.is_bounded


# -- iid copies -------------------------------------------------------------


@dataclass(frozen=True, repr=False)
class IidCopiesModel(SequenceModel):
    """Fresh draws from one marginal; the limit is an independent copy.

    The deviation |X_n - X| has the same distribution at every index, which
    is exactly what makes the distribution-distance series trivially zero
    while the probability modes fail for nondegenerate marginals.
    """

    dist: DistributionSpec

    kind = ModelKind.IID_COPIES

    @property
    def token(self) -> str:
        return f"iid-copies:dist={self.dist.token}"

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(self.dist)

    @property
    def degenerate(self) -> bool:
        return self.dist.family is Family.POINT_MASS

    def sample_values(self, horizon, generator):
        return self.dist.quantile(generator.random(horizon))

    def deviation_tail(self, ns, t):
        nsf = _as_ns(ns)
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.dist.difference_abs_tail(t), nsf.shape).copy()

    def tail_series_form(self, eps):
        level = float(self.dist.difference_abs_tail(eps))
        return SeriesForm("constant", level=level) if level > 0 else SeriesForm("zero")

    def deviation_moment(self, ns, p):
        nsf = _as_ns(ns)
        return np.full_like(nsf, self.dist.difference_abs_moment(p))

    def moment_series_form(self, p):
        level = self.dist.difference_abs_moment(p)
        return SeriesForm("constant", level=level) if level > 0 else SeriesForm("zero")

    def deviation_sup(self, ns):
        nsf = _as_ns(ns)
        sup = self.dist.sup_abs()
        return np.full_like(nsf, 2.0 * sup if math.isfinite(sup) else math.inf)

    def sup_series_form(self):
        if self.degenerate:
            return SeriesForm("zero")
        sup = self.dist.sup_abs()
        return SeriesForm("constant", level=2.0 * sup if math.isfinite(sup) else math.inf)

    def marginal_cdf(self, ns, x):
        nsf = _as_ns(ns)
        return np.full_like(nsf, float(self.dist.cdf(x)))

    def s1d_gap(self, ns, center, width):
        return np.zeros_like(_as_ns(ns))

    def strong_as_analysis(self, alpha):
        if self.degenerate:
            return "HOLDS", "degenerate marginal, all terms zero"
        return (
            "FAILS",
            "independent deviations exceed a fixed level infinitely often "
            "almost surely, so no path series can converge",
        )

    def pointwise_limit_analysis(self):
        if self.degenerate:
            return "HOLDS", "degenerate marginal"
        return "FAILS", "the deviation distribution does not depend on n"

    def tail_limit_zero(self, eps):
        return self.degenerate or float(self.dist.difference_abs_tail(eps)) == 0.0

    def moment_limit_zero(self, p):
        return self.degenerate

    def sup_limit_zero(self):
        return self.degenerate

    def cdf_gap_limit_zero(self):
        return True  # identical marginals at every index

    @property
    def is_bounded(self) -> bool:
        return self.dist.is_bounded


# -- single-draw explicit models --------------------------------------------


@dataclass(frozen=True, repr=False)
class ShiftedLimitModel(SequenceModel):
    """X_n = X + r(n) for one draw X; deterministic deviation r(n)."""

    base: DistributionSpec
    rate: RateSpec

    kind = ModelKind.EXPLICIT_SPACE

    @property
    def token(self) -> str:
        return f"shifted:base={self.base.token},rate={self.rate.token}"

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(self.base)

    def sample_values(self, horizon, generator):
        x = float(self.base.quantile(generator.random(1))[0])
        return x + self.rate.values(np.arange(1, horizon + 1))

    def deviation_tail(self, ns, t):
        r = self.rate.values(_as_ns(ns))
        return (r >= np.asarray(t, dtype=float)).astype(float)

    def tail_series_form(self, eps):
        cut = self.rate.threshold_cutoff(eps)
        if cut is None:
            return None
        return SeriesForm("finite", support_end=cut) if cut else SeriesForm("zero")

    def deviation_moment(self, ns, p):
        return self.rate.values(_as_ns(ns)) ** p

    def moment_series_form(self, p):
        return self.rate.power_series_form(p)

    def deviation_sup(self, ns):
        return self.rate.values(_as_ns(ns))

    def sup_series_form(self):
        return self.rate.power_series_form(1.0)

    def marginal_cdf(self, ns, x):
        r = self.rate.values(_as_ns(ns))
        return self.base.cdf(x - r)

    def s1d_gap(self, ns, center, width):
        r = self.rate.values(_as_ns(ns))
        shifted = self.base.ramp_expectation(center - r, width)
        still = float(self.base.ramp_expectation(center, width))
        return np.abs(shifted - still)

    def s1d_domination_form(self, lipschitz):
        # |E f(X + r) - E f(X)| <= lipschitz * r(n)
        form = self.rate.power_series_form(1.0)
        return replace(form, is_bound=True) if form.verdict() is Verdict.CONVERGENT else None

    def path_deviation_terms(self, omega, ns, alpha):
        if not 0.0 < omega < 1.0:
            raise ValueError("omega must lie strictly inside (0, 1)")
        return self.rate.values(_as_ns(ns)) ** alpha

    def path_series_form(self, omega, alpha):
        return self.rate.power_series_form(alpha)

    def strong_as_analysis(self, alpha):
        verdict = self.rate.power_series_form(alpha).verdict().value
        if verdict == "CONVERGENT":
            return "HOLDS", "deterministic deviations with a summable power"
        return "FAILS", "deterministic deviations with a divergent power sum"

    def pointwise_limit_analysis(self):
        return "HOLDS", "the deterministic deviation r(n) vanishes"

    def tail_limit_zero(self, eps):
        return True

    def moment_limit_zero(self, p):
        return True

    def sup_limit_zero(self):
        return True

    def cdf_gap_limit_zero(self):
        return True

    @property
    def is_bounded(self) -> bool:
        return self.base.is_bounded


@dataclass(frozen=True, repr=False)
class DriftModel(ShiftedLimitModel):
    """Deterministic sequence C + r(n); the limit is the constant C."""

    base: DistributionSpec = field(init=False)
    center: float = 0.0

    kind = ModelKind.DETERMINISTIC

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", DistributionSpec(Family.POINT_MASS, loc=self.center))

    @property
    def token(self) -> str:
        if self.rate.is_zero:
            return f"const:center={self.center:g}"
        return f"drift:center={self.center:g},rate={self.rate.token}"

    def values_at(self, ns) -> np.ndarray:
        return self.center + self.rate.values(_as_ns(ns))

    def min_abs_value(self) -> float:
        """inf_n |C + r(n)|; zero when the sequence meets or crosses zero."""
        first = self.center + float(self.rate.values(np.asarray([1]))[0])
        lo, hi = min(self.center, first), max(self.center, first)
        if lo <= 0.0 <= hi and not (lo == hi and lo != 0.0):
            return 0.0 if (lo < 0.0 < hi or self.center == 0.0) else min(abs(lo), abs(hi))
        return min(abs(lo), abs(hi))


def ConstantModel(center: float) -> DriftModel:
    return DriftModel(center=center, rate=parse_rate("zero"))


@dataclass(frozen=True, repr=False)
class ScaledNoiseModel(SequenceModel):
    """X_n = C + Z * r(n) for one noise draw Z; the limit is the constant C."""

    center: float
    noise: DistributionSpec
    rate: RateSpec

    kind = ModelKind.EXPLICIT_SPACE

    def __post_init__(self) -> None:
        if self.rate.is_zero:
            raise ValueError("scaled models need a strictly positive rate; use const instead")
        if self.noise.loc != 0.0:
            raise ValueError("noise must be centered at zero (use the model center instead)")

    @property
    def token(self) -> str:
        return f"scaled:center={self.center:g},noise={self.noise.token},rate={self.rate.token}"

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(DistributionSpec(Family.POINT_MASS, loc=self.center))

    def sample_values(self, horizon, generator):
        z = float(self.noise.quantile(generator.random(1))[0])
        return self.center + z * self.rate.values(np.arange(1, horizon + 1))

    def deviation_tail(self, ns, t):
        r = self.rate.values(_as_ns(ns))
        return self.noise.abs_tail(np.asarray(t, dtype=float) / r)

    def tail_series_form(self, eps):
        k = self.noise.abs_tail_power()
        if k is not None:
            # P(|Z| >= eps/r) ~ c (r/eps)^k, an exact power-law comparison
            return self.rate.power_series_form(k)
        sup = self.noise.sup_abs()
        if math.isfinite(sup):
            cut = self.rate.threshold_cutoff(eps / sup)
            if cut is None:
                return None
            return SeriesForm("finite", support_end=cut) if cut else SeriesForm("zero")
        return None  # lighter-than-power tails: leave it to the fit

    def deviation_moment(self, ns, p):
        r = self.rate.values(_as_ns(ns))
        return self.noise.abs_moment(p) * r**p

    def moment_series_form(self, p):
        if not self.noise.has_abs_moment(p):
            return SeriesForm("constant", level=math.inf)
        return self.rate.power_series_form(p)

    def deviation_sup(self, ns):
        r = self.rate.values(_as_ns(ns))
        sup = self.noise.sup_abs()
        return sup * r if math.isfinite(sup) else np.full_like(r, math.inf)

    def sup_series_form(self):
        if math.isfinite(self.noise.sup_abs()):
            return self.rate.power_series_form(1.0)
        return SeriesForm("constant", level=math.inf)

    def marginal_cdf(self, ns, x):
        r = self.rate.values(_as_ns(ns))
        return self.noise.cdf((x - self.center) / r)

    def s1d_gap(self, ns, center, width):
        r = self.rate.values(_as_ns(ns))
        moved = self.noise.ramp_expectation((center - self.center) / r, width / r)
        at_limit = float(np.clip((self.center - center) / width, -1.0, 1.0))
        return np.abs(moved - at_limit)

    def s1d_domination_form(self, lipschitz):
        # |E f(C + Z r) - f(C)| <= lipschitz * E|Z| * r(n) when E|Z| is finite
        if not self.noise.has_abs_moment(1.0):
            return None
        form = self.rate.power_series_form(1.0)
        return replace(form, is_bound=True) if form.verdict() is Verdict.CONVERGENT else None

    def path_deviation_terms(self, omega, ns, alpha):
        if not 0.0 < omega < 1.0:
            raise ValueError("omega must lie strictly inside (0, 1)")
        z = abs(float(self.noise.quantile(np.asarray([omega]))[0]))
        return (z ** alpha) * self.rate.values(_as_ns(ns)) ** alpha

    def path_series_form(self, omega, alpha):
        z = abs(float(self.noise.quantile(np.asarray([omega]))[0]))
        return self.rate.power_series_form(alpha, coefficient_positive=z > 0)

    def strong_as_analysis(self, alpha):
        verdict = self.rate.power_series_form(alpha).verdict().value
        if verdict == "CONVERGENT":
            return "HOLDS", "|Z|^alpha is finite almost surely and the rate power sums"
        if any(value == 0.0 for value, _ in self.noise.atoms()):
            return None
        return "FAILS", "|Z| > 0 almost surely and the rate power sum diverges"

    def pointwise_limit_analysis(self):
        return "HOLDS", "every noise value is finite and the rate vanishes"

    def tail_limit_zero(self, eps):
        return True

    def moment_limit_zero(self, p):
        return self.noise.has_abs_moment(p)

    def sup_limit_zero(self):
        return math.isfinite(self.noise.sup_abs())

    def cdf_gap_limit_zero(self):
        return True

    @property
    def is_bounded(self) -> bool:
        return self.noise.is_bounded


# -- named counterexamples ---------------------------------------------------


@dataclass(frozen=True, repr=False)
class CounterexampleModel(SequenceModel):
    """Pointwise wrapper around the named examples (exa-3.1/3.2/3.3)."""

    spec: cx.ExampleSpec

    kind = ModelKind.EXPLICIT_SPACE

    def __post_init__(self) -> None:
        if self.spec.name == "exa-3.4":
            raise ValueError("exa-3.4 is an iid-copies model, not a pointwise one")

    @property
    def token(self) -> str:
        return self.spec.token

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(DistributionSpec(Family.POINT_MASS, loc=0.0))

    def sample_values(self, horizon, generator):
        omega = float(generator.random(1)[0])
        return np.asarray(cx.eval_example(self.spec, np.arange(1, horizon + 1), omega))

    def deviation_tail(self, ns, t):
        nsf = _as_ns(ns)
        t = np.asarray(t, dtype=float)
        name = self.spec.name
        if name == "exa-3.1":
            return np.where(t <= 1.0, nsf**-2.0, 0.0)
        if name == "exa-3.2":
            return np.where(t <= 1.0, 1.0 / nsf, 0.0)
        low = nsf ** (-1.0 / self.spec.alpha)
        return np.where(t > 1.0, 0.0, np.where(low >= t, 1.0, nsf**-2.0))

    def tail_series_form(self, eps):
        return cx.example_series_form(self.spec, cx.TailProb(eps))

    def deviation_moment(self, ns, p):
        return np.asarray(cx.example_series_term(self.spec, cx.PthMoment(p), np.asarray(ns)))

    def moment_series_form(self, p):
        return cx.example_series_form(self.spec, cx.PthMoment(p))

    def deviation_sup(self, ns):
        return np.asarray(cx.example_series_term(self.spec, cx.SupNorm(), np.asarray(ns)))

    def sup_series_form(self):
        return cx.example_series_form(self.spec, cx.SupNorm())

    def marginal_cdf(self, ns, x):
        nsf = _as_ns(ns)
        name = self.spec.name
        upper_p = nsf**-2.0 if name != "exa-3.2" else 1.0 / nsf
        if name == "exa-3.3":
            low = nsf ** (-1.0 / self.spec.alpha)
        else:
            low = np.zeros_like(nsf)
        below_low = x < low
        below_high = x < 1.0
        return np.where(below_low, 0.0, np.where(below_high, 1.0 - upper_p, 1.0))

    def s1d_gap(self, ns, center, width):
        nsf = _as_ns(ns)
        name = self.spec.name
        upper_p = nsf**-2.0 if name != "exa-3.2" else 1.0 / nsf
        ramp = lambda v: np.clip((v - center) / width, -1.0, 1.0)
        if name == "exa-3.3":
            low_val = ramp(nsf ** (-1.0 / self.spec.alpha))
        else:
            low_val = ramp(np.zeros_like(nsf))
        expect = upper_p * ramp(1.0) + (1.0 - upper_p) * low_val
        return np.abs(expect - ramp(0.0))

    def path_deviation_terms(self, omega, ns, alpha):
        return np.asarray(
            cx.example_series_term(self.spec, cx.AlphaPathTerm(alpha, omega), np.asarray(ns))
        )

    def path_series_form(self, omega, alpha):
        return cx.example_series_form(self.spec, cx.AlphaPathTerm(alpha, omega))

    def strong_as_analysis(self, alpha):
        if self.spec.name == "exa-3.3":
            return "FAILS", "every path term is at least 1/n"
        return "HOLDS", "each omega activates only finitely many indices"

    def pointwise_limit_analysis(self):
        return "HOLDS", "pointwise values reach (or decay to) zero for every omega"

    def tail_limit_zero(self, eps):
        return True

    def moment_limit_zero(self, p):
        return True

    def sup_limit_zero(self):
        return False  # the sup deviation is exactly 1 forever

    def cdf_gap_limit_zero(self):
        return True

    @property
    def is_bounded(self) -> bool:
        return True


# -- analytic tail probes ----------------------------------------------------


@dataclass(frozen=True, repr=False)
class PowerTailModel(SequenceModel):
    """Probe-only model with P(|X_n - X| >= t) = min(1, coef / (t * n**rho))."""

    coef: float = 1.0
    rho: float = 0.5

    kind = ModelKind.ANALYTIC_TAIL
    supports_sampling = False

    def __post_init__(self) -> None:
        if not self.coef > 0 or not self.rho > 0:
            raise ValueError("coef and rho must be positive")

    @property
    def token(self) -> str:
        return f"powtail:coef={self.coef:g},rho={self.rho:g}"

    @property
    def limit(self) -> LimitSpec:
        return LimitSpec(DistributionSpec(Family.POINT_MASS, loc=0.0))

    def deviation_tail(self, ns, t):
        nsf = _as_ns(ns)
        t = np.asarray(t, dtype=float)
        return np.minimum(1.0, self.coef / (t * nsf**self.rho))

    def tail_limit_zero(self, eps):
        return True


# -- compositions ------------------------------------------------------------

_COMPOSE_OPS = ("sum", "product", "quotient")


@dataclass(frozen=True, repr=False)
class ComposedModel(SequenceModel):
    """Pointwise sum/product/quotient of an iid-copies operand with a
    deterministic one.

    The second operand must be deterministic (drift or const): that keeps the
    composed marginals exact affine transforms of the first operand, which is
    how the test-function series stays analytic.  A quotient requires the
    denominator sequence to stay bounded away from zero, checked here at
    construction.
    """

    op: str
    x: IidCopiesModel
    y: DriftModel

    kind = ModelKind.COMPOSED

    def __post_init__(self) -> None:
        if self.op not in _COMPOSE_OPS:
            raise ValueError(f"op must be one of {_COMPOSE_OPS}")
        if not isinstance(self.x, IidCopiesModel):
            raise ValueError("the first operand must be an iid-copies model")
        if not isinstance(self.y, DriftModel):
            raise ValueError("the second operand must be deterministic (drift/const)")
        if self.op in ("product", "quotient"):
            first = self.y.values_at(np.asarray([1]))[0]
            if not (self.y.center > 0 and first > 0):
                raise ValueError(f"{self.op} composition requires a positive deterministic operand")
        if self.op == "quotient" and self.y.min_abs_value() <= 0.0:
            raise ValueError("quotient composition requires an operand bounded away from zero")

    @property
    def token(self) -> str:
        return f"composed:op={self.op},x=({self.x.token}),y=({self.y.token})"

    @property
    def limit(self) -> LimitSpec:
        c = self.y.center
        if self.op == "sum":
            return LimitSpec(self.x.dist.affine(1.0, c))
        if self.op == "product":
            return LimitSpec(self.x.dist.affine(c, 0.0))
        return LimitSpec(self.x.dist.affine(1.0 / c, 0.0))

    def sample_values(self, horizon, generator):
        ns = np.arange(1, horizon + 1)
        xv = self.x.sample_values(horizon, generator)
        yv = self.y.values_at(ns)
        if self.op == "sum":
            return xv + yv
        if self.op == "product":
            return xv * yv
        return xv / yv

    def marginal_cdf(self, ns, x):
        yv = self.y.values_at(_as_ns(ns))
        if self.op == "sum":
            return self.x.dist.cdf(x - yv)
        if self.op == "product":
            return self.x.dist.cdf(x / yv)
        return self.x.dist.cdf(x * yv)

    def s1d_gap(self, ns, center, width):
        yv = self.y.values_at(_as_ns(ns))
        dist = self.x.dist
        if self.op == "sum":
            moved = dist.ramp_expectation(center - yv, width)
        elif self.op == "product":
            moved = dist.ramp_expectation(center / yv, width / yv)
        else:
            moved = dist.ramp_expectation(center * yv, width * yv)
        at_limit = float(self.limit.distribution.ramp_expectation(center, width))
        return np.abs(moved - at_limit)

    def s1d_domination_form(self, lipschitz):
        # identical marginals kill the second gap term; the first is bounded by
        # lipschitz * (sup|X| where needed) * |y_n - C|
        if self.op != "sum" and not self.x.is_bounded:
            return None
        form = self.y.rate.power_series_form(1.0)
        return replace(form, is_bound=True) if form.verdict() is Verdict.CONVERGENT else None

    def cdf_gap_limit_zero(self):
        return True

    @property
    def is_bounded(self) -> bool:
        if self.op == "quotient":
            return self.x.is_bounded and self.y.min_abs_value() > 0
        return self.x.is_bounded


# -- construction ------------------------------------------------------------


def _split_args(text: str) -> dict[str, str]:
    """Split 'k=v,k=v' respecting parentheses and brackets inside values."""
    out: dict[str, str] = {}
    depth = 0
    current = []
    parts: list[str] = []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if current:
        parts.append("".join(current))
    for part in parts:
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def parse_model(token: str) -> SequenceModel:
    """Build a model from its token; see the module docstring for the grammar."""
    text = token.strip()
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    args = _split_args(rest) if rest else {}

    def dist_arg(key: str, default: str | None = None) -> DistributionSpec:
        raw = args.get(key, default)
        if raw is None:
            raise ValueError(f"model {name!r} requires {key}=<distribution>")
        return parse_distribution(raw)

    if name in cx.EXAMPLE_NAMES:
        alpha = float(args.get("alpha", 1.0))
        if name == "exa-3.4":
            return IidCopiesModel(dist_arg("dist", "normal"))
        return CounterexampleModel(cx.ExampleSpec(name, alpha=alpha))
    if name == "iid-mean":
        return IidMeanModel(dist_arg("dist"))
    if name == "iid-copies":
        return IidCopiesModel(dist_arg("dist"))
    if name == "shifted":
        return ShiftedLimitModel(dist_arg("base"), parse_rate(args.get("rate", "inv-n2")))
    if name == "scaled":
        return ScaledNoiseModel(
            center=float(args.get("center", 0.0)),
            noise=dist_arg("noise"),
            rate=parse_rate(args.get("rate", "inv-sqrt")),
        )
    if name == "drift":
        return DriftModel(center=float(args.get("center", 0.0)),
                          rate=parse_rate(args.get("rate", "inv-n2")))
    if name == "const":
        return ConstantModel(float(args.get("center", 0.0)))
    if name == "powtail":
        return PowerTailModel(coef=float(args.get("coef", 1.0)),
                              rho=float(args.get("rho", 0.5)))
    raise ValueError(f"unknown model token {token!r}")


def sample_path(model: SequenceModel, horizon: int, rng: RngStream) -> PathSample:
    """Realize one trajectory; a pure function of (model, horizon, stream)."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if not model.supports_sampling:
        raise UnsupportedQuery(f"{model.token} is analytic-only and cannot be sampled")
    values = model.sample_values(int(horizon), rng.generator())
    return PathSample(
        model_id=model.token,
        seed=rng.seed,
        stream_id=rng.stream_id,
        horizon=int(horizon),
        values=np.asarray(values, dtype=float),
    )
