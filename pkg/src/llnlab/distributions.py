"""Built-in scalar distributions and the closed forms the checkers lean on.

Sampling is inverse-CDF throughout: one uniform in, one variate out, so a
variate is a pure function of its stream position.  The interval means give
exact expectations of clamped ramp test functions, which is what keeps the
distribution-distance series analytic instead of Monte Carlo.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = ["Family", "DistributionSpec", "parse_distribution"]


class Family(enum.Enum):
    NORMAL = "normal"
    RADEMACHER = "rademacher"
    UNIFORM = "uniform"
    STUDENT_T = "student-t"
    PARETO = "pareto"
    CAUCHY = "cauchy"
    POINT_MASS = "point-mass"


_SHAPED = (Family.STUDENT_T, Family.PARETO)


class UnsupportedQuery(Exception):
    """A closed form was requested that this object does not provide."""


@lru_cache(maxsize=4)
def _gauss_legendre01(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


@dataclass(frozen=True)
class DistributionSpec:
    """One scalar distribution: family, location/scale, optional tail shape.

    Conventions: UNIFORM covers (loc, loc + scale); RADEMACHER is loc +/-
    scale with equal probability; STUDENT_T/PARETO are loc + scale * V with V
    the standard variate (``shape`` is the degrees of freedom, resp. the tail
    index of P(V > v) = v**-shape on [1, inf)).  ``truncation`` conditions a
    NORMAL on a closed interval in x-space; other families reject it.
    """

    family: Family
    loc: float = 0.0
    scale: float = 1.0
    shape: float | None = None
    truncation: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.family is not Family.POINT_MASS and not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.family in _SHAPED:
            if self.shape is None or not self.shape > 0:
                raise ValueError(f"{self.family.value} requires a positive shape parameter")
        elif self.shape is not None:
            raise ValueError(f"{self.family.value} takes no shape parameter")
        if self.truncation is not None:
            if self.family is not Family.NORMAL:
                raise ValueError("truncation is only supported for the normal family")
            lo, hi = self.truncation
            if not lo < hi:
                raise ValueError(f"empty truncation interval {self.truncation}")

    # -- descriptive ---------------------------------------------------

    @property
    def token(self) -> str:
        bits = [self.family.value]
        args = []
        if self.family in _SHAPED:
            args.append(f"{self.shape:g}")
        if self.loc != 0.0 or self.scale != 1.0:
            args.extend([f"{self.loc:g}", f"{self.scale:g}"])
        if args:
            bits.append("(" + ",".join(args) + ")")
        if self.truncation is not None:
            bits.append(f"[{self.truncation[0]:g},{self.truncation[1]:g}]")
        return "".join(bits)

    def mean(self) -> float | None:
        """Exact mean, or None when it does not exist."""
        if self.family is Family.NORMAL:
            if self.truncation is None:
                return self.loc
            lo, hi = self._std_trunc_bounds()
            z = special.ndtr(hi) - special.ndtr(lo)
            return self.loc + self.scale * (_phi(lo) - _phi(hi)) / z
        if self.family in (Family.RADEMACHER, Family.POINT_MASS):
            return self.loc
        if self.family is Family.UNIFORM:
            return self.loc + self.scale / 2.0
        if self.family is Family.STUDENT_T:
            return self.loc if self.shape > 1 else None
        if self.family is Family.PARETO:
            if self.shape > 1:
                return self.loc + self.scale * self.shape / (self.shape - 1.0)
            return None
        return None  # CAUCHY

    def center(self) -> float:
        """Mean when it exists, otherwise the symmetry point ``loc``."""
        m = self.mean()
        return self.loc if m is None else m

    def moment_order_finite(self) -> float:
        """Largest order a with E|X|**a finite (exclusive for heavy tails)."""
        if self.family is Family.STUDENT_T:
            return float(self.shape)
        if self.family is Family.PARETO:
            return float(self.shape)
        if self.family is Family.CAUCHY:
            return 1.0
        return math.inf

    def has_abs_moment(self, p: float, log_factor: bool = False) -> bool:
        """Whether E|X|**p (optionally with a log+ factor) is finite."""
        order = self.moment_order_finite()
        if math.isinf(order):
            return True
        return p < order  # strict: the boundary moment diverges, log factor too

    @property
    def is_bounded(self) -> bool:
        return not math.isinf(self.sup_abs())

    def sup_abs(self) -> float:
        """Essential supremum of |X|."""
        if self.family is Family.POINT_MASS:
            return abs(self.loc)
        if self.family is Family.RADEMACHER:
            return max(abs(self.loc - self.scale), abs(self.loc + self.scale))
        if self.family is Family.UNIFORM:
            return max(abs(self.loc), abs(self.loc + self.scale))
        if self.family is Family.NORMAL and self.truncation is not None:
            return max(abs(self.truncation[0]), abs(self.truncation[1]))
        return math.inf

    def atoms(self) -> tuple[tuple[float, float], ...]:
        """(value, probability) pairs for the discrete families."""
        if self.family is Family.POINT_MASS:
            return ((self.loc, 1.0),)
        if self.family is Family.RADEMACHER:
            return ((self.loc - self.scale, 0.5), (self.loc + self.scale, 0.5))
        return ()

    def affine(self, mul: float, add: float) -> "DistributionSpec":
        """Distribution of mul * X + add (mul > 0)."""
        if not mul > 0:
            raise ValueError("affine transform requires a positive multiplier")
        trunc = None
        if self.truncation is not None:
            trunc = (self.truncation[0] * mul + add, self.truncation[1] * mul + add)
        return replace(self, loc=self.loc * mul + add, scale=self.scale * mul, truncation=trunc)

    # -- sampling and distribution functions ---------------------------

    def _std_trunc_bounds(self) -> tuple[float, float]:
        lo, hi = self.truncation
        return (lo - self.loc) / self.scale, (hi - self.loc) / self.scale

    def quantile(self, u):
        """Inverse CDF, vectorized; the sole route from uniforms to variates."""
        u = np.asarray(u, dtype=float)
        f = self.family
        if f is Family.NORMAL:
            if self.truncation is None:
                return self.loc + self.scale * special.ndtri(u)
            lo, hi = self._std_trunc_bounds()
            plo, phi = special.ndtr(lo), special.ndtr(hi)
            return self.loc + self.scale * special.ndtri(plo + u * (phi - plo))
        if f is Family.RADEMACHER:
            return self.loc + self.scale * np.where(u < 0.5, -1.0, 1.0)
        if f is Family.UNIFORM:
            return self.loc + self.scale * u
        if f is Family.STUDENT_T:
            return self.loc + self.scale * special.stdtrit(self.shape, u)
        if f is Family.PARETO:
            return self.loc + self.scale * np.power(1.0 - u, -1.0 / self.shape)
        if f is Family.CAUCHY:
            return self.loc + self.scale * np.tan(np.pi * (u - 0.5))
        return np.full_like(u, self.loc)  # POINT_MASS

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        f = self.family
        z = (x - self.loc) / self.scale if f is not Family.POINT_MASS else x
        if f is Family.NORMAL:
            if self.truncation is None:
                return special.ndtr(z)
            lo, hi = self._std_trunc_bounds()
            plo, phi = special.ndtr(lo), special.ndtr(hi)
            return np.clip((special.ndtr(np.clip(z, lo, hi)) - plo) / (phi - plo), 0.0, 1.0)
        if f is Family.RADEMACHER:
            return np.where(z < -1.0, 0.0, np.where(z < 1.0, 0.5, 1.0))
        if f is Family.UNIFORM:
            return np.clip(z, 0.0, 1.0)
        if f is Family.STUDENT_T:
            return special.stdtr(self.shape, z)
        if f is Family.PARETO:
            return np.where(z < 1.0, 0.0, 1.0 - np.power(np.maximum(z, 1.0), -self.shape))
        if f is Family.CAUCHY:
            return 0.5 + np.arctan(z) / np.pi
        return np.where(x < self.loc, 0.0, 1.0)  # POINT_MASS

    def abs_tail(self, t):
        """P(|X| >= t), vectorized over t (t > 0)."""
        t = np.asarray(t, dtype=float)
        if self.family is Family.NORMAL and self.loc == 0.0 and self.truncation is None:
            return special.erfc(t / (self.scale * math.sqrt(2.0)))
        if self.atoms():
            out = np.zeros_like(t)
            for value, prob in self.atoms():
                out = out + prob * (np.abs(value) >= t)
            return out
        # continuous families: P(X >= t) + P(X <= -t)
        return (1.0 - self.cdf(t)) + self.cdf(-t)

    def abs_tail_power(self) -> float | None:
        """k with P(|X| >= t) ~ c * t**-k, or None for lighter tails."""
        if self.family is Family.CAUCHY:
            return 1.0
        if self.family is Family.STUDENT_T:
            return float(self.shape)
        if self.family is Family.PARETO:
            return float(self.shape)
        return None

    # -- exact expectations --------------------------------------------

    def abs_moment(self, p: float) -> float:
        """E|X|**p for the centered/standard cases used by the analytic routes."""
        if not p > 0:
            raise ValueError("p must be positive")
        f = self.family
        if f is Family.POINT_MASS:
            return abs(self.loc) ** p
        if self.loc != 0.0 or self.truncation is not None:
            raise UnsupportedQuery(f"abs_moment with loc={self.loc} for {f.value}")
        if not self.has_abs_moment(p):
            return math.inf
        s = self.scale
        if f is Family.NORMAL:
            return s**p * 2 ** (p / 2) * special.gamma((p + 1) / 2) / math.sqrt(math.pi)
        if f is Family.RADEMACHER:
            return s**p
        if f is Family.UNIFORM:
            return s**p / (p + 1.0)
        if f is Family.STUDENT_T:
            nu = self.shape
            num = special.gamma((p + 1) / 2) * special.gamma((nu - p) / 2) * nu ** (p / 2)
            return s**p * num / (math.sqrt(math.pi) * special.gamma(nu / 2))
        if f is Family.PARETO:
            a = self.shape
            return s**p * a / (a - p)
        if f is Family.CAUCHY:
            return s**p / math.cos(math.pi * p / 2.0)
        raise UnsupportedQuery(f"abs_moment for {f.value}")

    def interval_mean(self, lo, hi):
        """E[X; lo < X <= hi], vectorized over the (finite or infinite) bounds."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        atoms = self.atoms()
        if atoms:
            out = np.zeros(np.broadcast(lo, hi).shape)
            for value, prob in atoms:
                out = out + np.where((lo < value) & (value <= hi), value * prob, 0.0)
            return out
        a, b = (lo - self.loc) / self.scale, (hi - self.loc) / self.scale
        std = self._std_interval_mean(a, b)
        mass = self.cdf(hi) - self.cdf(lo)
        return self.loc * mass + self.scale * std

    def _std_interval_mean(self, a, b):
        f = self.family
        if f is Family.NORMAL:
            if self.truncation is None:
                return _phi(a) - _phi(b)
            tlo, thi = self._std_trunc_bounds()
            z = special.ndtr(thi) - special.ndtr(tlo)
            a, b = np.clip(a, tlo, thi), np.clip(b, tlo, thi)
            return (_phi(a) - _phi(b)) / z
        if f is Family.UNIFORM:
            a, b = np.clip(a, 0.0, 1.0), np.clip(b, 0.0, 1.0)
            return (b * b - a * a) / 2.0
        if f is Family.CAUCHY:
            return (np.log1p(b * b) - np.log1p(a * a)) / (2.0 * np.pi)
        if f is Family.STUDENT_T:
            nu = self.shape
            if nu == 1.0:
                return (np.log1p(b * b) - np.log1p(a * a)) / (2.0 * np.pi)
            c = special.gamma((nu + 1) / 2) / (math.sqrt(nu * math.pi) * special.gamma(nu / 2))
            g = lambda x: np.where(
                np.isinf(x), 0.0, np.power(1.0 + np.square(np.where(np.isinf(x), 0.0, x)) / nu, -(nu - 1) / 2)
            )
            return c * nu / (nu - 1.0) * (g(a) - g(b))
        if f is Family.PARETO:
            aa = np.maximum(a, 1.0)
            bb = np.maximum(b, 1.0)
            k = self.shape
            if k == 1.0:
                return np.log(bb / aa)
            return k / (1.0 - k) * (np.power(bb, 1.0 - k) - np.power(aa, 1.0 - k))
        raise UnsupportedQuery(f"interval mean for {f.value}")

    def ramp_expectation(self, center, width):
        """E[clamp((X - center) / width, -1, 1)], vectorized over both arguments.

        This is exact (per-family antiderivatives), which is what makes the
        test-function series analytic rather than sampled.
        """
        center = np.asarray(center, dtype=float)
        width = np.asarray(width, dtype=float)
        atoms = self.atoms()
        if atoms:
            out = np.zeros(np.broadcast(center, width).shape)
            for value, prob in atoms:
                out = out + prob * np.clip((value - center) / width, -1.0, 1.0)
            return out
        lo, hi = center - width, center + width
        mass = self.cdf(hi) - self.cdf(lo)
        linear = (self.interval_mean(lo, hi) - center * mass) / width
        return -self.cdf(lo) + (1.0 - self.cdf(hi)) + linear

    # -- two independent copies ----------------------------------------

    def difference_abs_tail(self, t):
        """P(|X' - X| >= t) for independent copies X, X'."""
        t = np.asarray(t, dtype=float)
        f = self.family
        if f is Family.POINT_MASS:
            return np.where(t <= 0.0, 1.0, 0.0)
        if f is Family.NORMAL and self.truncation is None:
            return special.erfc(t / (2.0 * self.scale))
        if f is Family.RADEMACHER:
            return np.where(t <= 0.0, 1.0, np.where(t <= 2.0 * self.scale, 0.5, 0.0))
        if f is Family.UNIFORM:
            frac = np.clip(t / self.scale, 0.0, 1.0)
            return np.square(1.0 - frac)
        if f is Family.CAUCHY:
            return 1.0 - (2.0 / np.pi) * np.arctan(t / (2.0 * self.scale))
        # general continuous case by quadrature over one copy
        nodes, weights = _gauss_legendre01(256)
        q = self.quantile(nodes)
        tt = np.atleast_1d(t)
        upper = 1.0 - self.cdf(q[None, :] + tt[:, None])
        lower = self.cdf(q[None, :] - tt[:, None])
        out = (upper + lower) @ weights
        return out.reshape(t.shape)

    def difference_abs_moment(self, p: float) -> float:
        """E|X' - X|**p for independent copies (quadrature fallback)."""
        if self.family is Family.POINT_MASS:
            return 0.0
        if not self.has_abs_moment(p):
            return math.inf
        if self.family is Family.NORMAL and self.truncation is None:
            return DistributionSpec(Family.NORMAL, 0.0, self.scale * math.sqrt(2.0)).abs_moment(p)
        nodes, weights = _gauss_legendre01(256)
        q = self.quantile(nodes)
        diffs = np.abs(q[:, None] - q[None, :]) ** p
        return float(weights @ diffs @ weights)


def _phi(z):
    z = np.asarray(z, dtype=float)
    finite = np.where(np.isinf(z), 0.0, z)
    out = np.exp(-0.5 * finite * finite) / math.sqrt(2.0 * math.pi)
    return np.where(np.isinf(z), 0.0, out)


def parse_distribution(token: str) -> DistributionSpec:
    """Parse tokens like ``normal``, ``normal(0,2)``, ``student-t(1.5)``,
    ``pareto(2.5,0,1)``, ``normal(0,1)[-3,3]``, ``point-mass(3)``."""
    text = token.strip().lower()
    trunc = None
    if text.endswith("]"):
        base, _, rest = text.partition("[")
        bounds = rest[:-1].split(",")
        if len(bounds) != 2:
            raise ValueError(f"bad truncation in distribution token {token!r}")
        trunc = (float(bounds[0]), float(bounds[1]))
        text = base
    args: list[float] = []
    if text.endswith(")"):
        name, _, rest = text.partition("(")
        args = [float(v) for v in rest[:-1].split(",") if v.strip()]
        text = name
    try:
        family = Family(text)
    except ValueError:
        raise ValueError(f"unknown distribution family {token!r}") from None
    shape = None
    if family in _SHAPED:
        if not args:
            raise ValueError(f"{family.value} requires a shape parameter")
        shape, args = args[0], args[1:]
    if family is Family.POINT_MASS:
        loc = args[0] if args else 0.0
        return DistributionSpec(family, loc=loc)
    loc = args[0] if len(args) > 0 else 0.0
    scale = args[1] if len(args) > 1 else 1.0
    return DistributionSpec(family, loc=loc, scale=scale, shape=shape, truncation=trunc)
