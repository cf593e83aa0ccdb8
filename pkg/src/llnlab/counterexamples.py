"""The named counterexample sequences on the unit interval.

Each is a sequence of measurable functions of a single uniform omega in
(0, 1), evaluated pointwise and with exact closed-form series terms.
Interval boundaries are taken literally: the upper branch lives on an open
interval (0, b) and omega = b takes the lower branch; the choice is a null
set and moves no series.  ``exa-3.4`` denotes a fresh-draws sequence (see
``models.IidCopiesModel``) and is rejected by the pointwise evaluator here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, Family, UnsupportedQuery
from .series import SeriesForm

__all__ = [
    "EXAMPLE_NAMES",
    "ExampleSpec",
    "PthMoment",
    "SupNorm",
    "TailProb",
    "AlphaPathTerm",
    "eval_example",
    "example_series_term",
    "example_series_form",
    "example_expected_verdicts",
    "tail_prob_cutoff",
    "nonzero_path_cutoff",
    "ModeClaim",
    "ModeVerdictSet",
]

EXAMPLE_NAMES = ("exa-3.1", "exa-3.2", "exa-3.3", "exa-3.4")

_DEFAULT_IID_DIST = DistributionSpec(Family.NORMAL)


@dataclass(frozen=True)
class ExampleSpec:
    """A named example plus its order parameter.

    ``alpha`` parameterizes the middle value n**(-1/alpha) of exa-3.3 and the
    summation order of the strong-a.s. claims of exa-3.2.  ``dist`` is the
    marginal used by exa-3.4 (any nondegenerate choice works; the default has
    every moment finite).
    """

    name: str
    alpha: float = 1.0
    dist: DistributionSpec = field(default=_DEFAULT_IID_DIST)

    def __post_init__(self) -> None:
        if self.name not in EXAMPLE_NAMES:
            raise ValueError(f"unknown example {self.name!r}; expected one of {EXAMPLE_NAMES}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def token(self) -> str:
        if self.name == "exa-3.4":
            return f"{self.name}:dist={self.dist.token}"
        if self.name == "exa-3.3" or self.alpha != 1.0:
            return f"{self.name}:alpha={self.alpha:g}"
        return self.name


# -- quantities -----------------------------------------------------------


@dataclass(frozen=True)
class PthMoment:
    p: float

    def __post_init__(self) -> None:
        if not self.p > 0:
            raise ValueError("p must be positive")


@dataclass(frozen=True)
class SupNorm:
    pass


@dataclass(frozen=True)
class TailProb:
    eps: float

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class AlphaPathTerm:
    alpha: float
    omega: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.omega < 1.0:
            raise ValueError("omega must lie strictly inside (0, 1)")


Quantity = PthMoment | SupNorm | TailProb | AlphaPathTerm


def _check_n(n) -> np.ndarray:
    ns = np.asarray(n)
    if not np.issubdtype(ns.dtype, np.integer) and not np.all(ns == np.floor(ns)):
        raise ValueError("n must be integral")
    if np.any(ns < 1):
        raise ValueError("n must be at least 1")
    return ns.astype(np.int64)


def eval_example(spec: ExampleSpec, n, omega: float):
    """X_n(omega) for the pointwise examples; vectorized over n."""
    if spec.name == "exa-3.4":
        raise UnsupportedQuery("exa-3.4 draws fresh variates and has no pointwise form")
    if not 0.0 < omega < 1.0:
        raise ValueError(f"omega must lie strictly inside (0, 1), got {omega}")
    ns = _check_n(n)
    nsf = ns.astype(float)
    if spec.name == "exa-3.1":
        values = np.where(omega < 1.0 / nsf**2, 1.0, 0.0)
    elif spec.name == "exa-3.2":
        values = np.where(omega < 1.0 / nsf, 1.0, 0.0)
    else:  # exa-3.3
        values = np.where(omega < 1.0 / nsf**2, 1.0, nsf ** (-1.0 / spec.alpha))
    return values if values.ndim else float(values)


def nonzero_path_cutoff(spec: ExampleSpec, omega: float) -> int:
    """Largest n whose upper branch is active at omega (0 when none)."""
    if spec.name == "exa-3.4":
        raise UnsupportedQuery("exa-3.4 has no pointwise form")
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie strictly inside (0, 1)")
    if spec.name == "exa-3.2":
        guess = int(math.floor(1.0 / omega))
        active = lambda n: omega < 1.0 / n
    else:
        guess = int(math.floor(omega**-0.5))
        active = lambda n: omega < 1.0 / n**2
    while guess >= 1 and not active(guess):
        guess -= 1
    while active(guess + 1):
        guess += 1
    return guess


def tail_prob_cutoff(spec: ExampleSpec, eps: float) -> int:
    """exa-3.3: smallest N with N**(-1/alpha) < eps, by ceiling arithmetic."""
    if spec.name != "exa-3.3":
        raise UnsupportedQuery("tail cutoff is specific to exa-3.3")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps > 1.0:
        return 1
    guess = max(int(math.floor(eps**-spec.alpha)), 0) + 1
    while guess > 1 and guess ** (-1.0 / spec.alpha) < eps:
        guess -= 1
    while not guess ** (-1.0 / spec.alpha) < eps:
        guess += 1
    return guess


def example_series_term(spec: ExampleSpec, quantity: Quantity, n):
    """Exact nonnegative series term for (example, quantity); vectorized in n."""
    ns = _check_n(n)
    nsf = ns.astype(float)
    scalar = nsf.ndim == 0
    nsf = np.atleast_1d(nsf)

    name = spec.name
    if isinstance(quantity, PthMoment):
        if name == "exa-3.1":
            out = nsf**-2.0
        elif name == "exa-3.2":
            out = 1.0 / nsf
        elif name == "exa-3.3":
            out = nsf**-2.0 + nsf ** (-quantity.p / spec.alpha) * (1.0 - nsf**-2.0)
        else:
            out = np.full_like(nsf, spec.dist.difference_abs_moment(quantity.p))
    elif isinstance(quantity, SupNorm):
        if name == "exa-3.4":
            sup = spec.dist.sup_abs()
            out = np.full_like(nsf, 2.0 * sup if math.isfinite(sup) else math.inf)
        else:
            out = np.ones_like(nsf)
    elif isinstance(quantity, TailProb):
        eps = quantity.eps
        if name == "exa-3.1":
            out = nsf**-2.0 if eps <= 1.0 else np.zeros_like(nsf)
        elif name == "exa-3.2":
            out = 1.0 / nsf if eps <= 1.0 else np.zeros_like(nsf)
        elif name == "exa-3.3":
            if eps > 1.0:
                out = np.zeros_like(nsf)
            else:
                cut = tail_prob_cutoff(spec, eps)
                out = np.where(nsf < cut, 1.0, nsf**-2.0)
        else:
            out = spec.dist.difference_abs_tail(np.full_like(nsf, eps))
    elif isinstance(quantity, AlphaPathTerm):
        if name == "exa-3.4":
            raise UnsupportedQuery("exa-3.4 path terms require joint sampling")
        values = eval_example(spec, ns, quantity.omega)
        out = np.atleast_1d(np.asarray(values, dtype=float)) ** quantity.alpha
    else:
        raise UnsupportedQuery(f"unsupported quantity {quantity!r} for {name}")
    return float(out[0]) if scalar else out


def example_series_form(spec: ExampleSpec, quantity: Quantity) -> SeriesForm:
    """Recognized closed form of the series behind (example, quantity)."""
    name = spec.name
    if isinstance(quantity, PthMoment):
        if name == "exa-3.1":
            return SeriesForm("power", power=2.0)
        if name == "exa-3.2":
            return SeriesForm("power", power=1.0)
        if name == "exa-3.3":
            return SeriesForm("power", power=min(2.0, quantity.p / spec.alpha))
        level = spec.dist.difference_abs_moment(quantity.p)
        return SeriesForm("constant", level=level)
    if isinstance(quantity, SupNorm):
        if name == "exa-3.4":
            sup = spec.dist.sup_abs()
            return SeriesForm("constant", level=2.0 * sup if math.isfinite(sup) else math.inf)
        return SeriesForm("constant", level=1.0)
    if isinstance(quantity, TailProb):
        if quantity.eps > 1.0 and name != "exa-3.4":
            return SeriesForm("zero")
        if name == "exa-3.1" or name == "exa-3.3":
            return SeriesForm("power", power=2.0)
        if name == "exa-3.2":
            return SeriesForm("power", power=1.0)
        level = float(spec.dist.difference_abs_tail(quantity.eps))
        return SeriesForm("constant", level=level)
    if isinstance(quantity, AlphaPathTerm):
        if name == "exa-3.3":
            return SeriesForm("power", power=1.0)
        cut = nonzero_path_cutoff(spec, quantity.omega)
        return SeriesForm("finite", support_end=cut) if cut else SeriesForm("zero")
    raise UnsupportedQuery(f"no closed form for {quantity!r} on {name}")


# -- registered claims ------------------------------------------------------


@dataclass(frozen=True)
class ModeClaim:
    mode: str
    params: tuple[tuple[str, float], ...]
    expected: str  # "HOLDS" | "FAILS"
    note: str

    def params_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class ModeVerdictSet:
    example: str
    claims: tuple[ModeClaim, ...]


def example_expected_verdicts(spec: ExampleSpec) -> ModeVerdictSet:
    """The registered claims each example is required to reproduce."""
    a = spec.alpha
    if spec.name == "exa-3.1":
        claims = (
            ModeClaim("s-lp", (("p", 1.0),), "HOLDS",
                      "p-th moments equal 1/n^2 for every p > 0, a convergent p-series"),
            ModeClaim("s-linf", (), "FAILS",
                      "the sup deviation is exactly 1 at every index"),
        )
    elif spec.name == "exa-3.2":
        claims = (
            ModeClaim("s-alpha-as", (("alpha", a),), "HOLDS",
                      "each omega sees at most ceil(1/omega)-1 nonzero terms"),
            ModeClaim("cc", (), "FAILS",
                      "tail probabilities equal 1/n below eps = 1, the harmonic series"),
            ModeClaim("s-lp", (("p", a),), "FAILS",
                      "alpha-th moments equal 1/n, the harmonic series"),
        )
    elif spec.name == "exa-3.3":
        claims = (
            ModeClaim("cc", (), "HOLDS",
                      "tail terms fall to 1/n^2 beyond the cutoff index for every eps"),
            ModeClaim("s-alpha-as", (("alpha", a),), "FAILS",
                      "every path term is at least 1/n, so each path series diverges"),
        )
    else:
        claims = (
            ModeClaim("s1-d", (), "HOLDS",
                      "identical marginals make every test-function term zero"),
            ModeClaim("s2-d", (), "HOLDS",
                      "identical marginals make every distribution-distance term zero"),
            ModeClaim("in-prob", (), "FAILS",
                      "the deviation distribution does not depend on n"),
        )
    return ModeVerdictSet(example=spec.name, claims=claims)
