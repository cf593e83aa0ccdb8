"""Series diagnostics: partial sums, dyadic tail-exponent fits, verdicts.

The finite-horizon stand-in for an infinite-series dichotomy.  Verdicts are
exact when a recognized closed form is supplied (p-series, geometric, finite
support, all zero) and heuristic otherwise: terms are grouped into dyadic
blocks, the block sums are fitted on a log scale, and the fitted term
exponent decides CONVERGENT / DIVERGENT / INCONCLUSIVE with a margin.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Verdict",
    "SlopeFit",
    "SeriesForm",
    "SeriesDiagnostic",
    "fit_tail_exponent",
    "fit_loglog_slope",
    "diagnose_analytic_series",
    "diagnose_empirical_series",
    "power_law_interpolate",
]

# Verdict margins around the harmonic boundary exponent 1.
CONVERGENT_EXPONENT = 1.1
DIVERGENT_EXPONENT = 0.9
MIN_FIT_BLOCKS = 6


class Verdict(str, enum.Enum):
    CONVERGENT = "CONVERGENT"
    DIVERGENT = "DIVERGENT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares exponent estimate with its uncertainty."""

    exponent: float
    half_width: float
    residual: float

    def to_payload(self) -> dict:
        return {
            "exponent": self.exponent,
            "half_width": self.half_width,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class SeriesForm:
    """Recognized closed form of a nonnegative term sequence.

    kind "power" means terms ~ c * n**-power * (log n)**-log_power eventually;
    "finite" means terms vanish beyond ``support_end``; "constant" means terms
    stay at ``level``; "geometric" decays at ratio ``level`` < 1.  With
    ``is_bound`` the form describes a dominating series instead of the terms
    themselves; such forms may only be used to certify convergence.
    """

    kind: str
    power: float = math.nan
    log_power: float = 0.0
    level: float = math.nan
    support_end: int = 0
    is_bound: bool = False

    def __post_init__(self) -> None:
        if self.is_bound and self.verdict() is not Verdict.CONVERGENT:
            raise ValueError("a dominating form can only certify convergence")

    def verdict(self) -> Verdict:
        if self.kind in ("zero", "finite", "geometric"):
            return Verdict.CONVERGENT
        if self.kind == "constant":
            return Verdict.DIVERGENT if self.level > 0 else Verdict.CONVERGENT
        if self.kind == "power":
            if self.power > 1.0:
                return Verdict.CONVERGENT
            if self.power < 1.0:
                return Verdict.DIVERGENT
            return Verdict.CONVERGENT if self.log_power > 1.0 else Verdict.DIVERGENT
        raise ValueError(f"unknown series form kind {self.kind!r}")

    def describe(self) -> str:
        rel = "bounded by" if self.is_bound else "~"
        if self.kind == "zero":
            return "closed form: all terms zero"
        if self.kind == "finite":
            return f"closed form: terms vanish beyond n={self.support_end}"
        if self.kind == "constant":
            return f"closed form: terms stay at level {self.level:g}"
        if self.kind == "geometric":
            return f"closed form: geometric decay, ratio {self.level:g}"
        extra = f" * (log n)^-{self.log_power:g}" if self.log_power else ""
        return f"closed form: terms {rel} c * n^-{self.power:g}{extra}"


@dataclass
class SeriesDiagnostic:
    """Partial sums of a nonnegative series together with its verdict."""

    source: str  # "analytic" | "empirical"
    verdict: Verdict
    evidence: str
    horizon: int
    total: float
    grid_ns: np.ndarray
    grid_terms: np.ndarray
    grid_partial_sums: np.ndarray
    grid_std_errs: np.ndarray | None = None
    fit: SlopeFit | None = None
    flags: tuple[str, ...] = ()

    def to_payload(self) -> dict:
        return {
            "source": self.source,
            "verdict": self.verdict.value,
            "evidence": self.evidence,
            "horizon": self.horizon,
            "partial_sum": self.total,
            "fit": self.fit.to_payload() if self.fit else None,
            "flags": list(self.flags),
        }


def _ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, two-sigma half width and rms residual of y ~ slope*x + const."""
    design = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(len(x) - 2, 1)
    spread = float(((x - x.mean()) ** 2).sum())
    se = math.sqrt(float((resid**2).sum()) / dof / spread) if spread > 0 else math.inf
    return float(coef[0]), 2.0 * se, float(np.sqrt((resid**2).mean()))


def fit_loglog_slope(ns: Sequence[float], values: Sequence[float]) -> SlopeFit:
    """OLS slope of log(values) against log(ns); requires positive values."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or np.any(~np.isfinite(values)):
        raise ValueError("log-log fit requires positive finite values")
    slope, hw, resid = _ols_line(np.log(ns), np.log(values))
    return SlopeFit(exponent=slope, half_width=hw, residual=resid)


def _dyadic_block_sums(terms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sums of terms over n in [2^j, 2^(j+1)); only complete blocks are kept."""
    n = len(terms)
    blocks = []
    j = 0
    while 2 ** (j + 1) - 1 <= n:
        lo, hi = 2**j, 2 ** (j + 1) - 1
        blocks.append(terms[lo - 1 : hi].sum())
        j += 1
    return np.arange(j, dtype=float), np.asarray(blocks, dtype=float)


def fit_tail_exponent(
    terms: np.ndarray, min_blocks: int = MIN_FIT_BLOCKS
) -> tuple[SlopeFit | None, Verdict, tuple[str, ...]]:
    """Dyadic-block tail-exponent fit on a dense nonnegative term sequence.

    Fits log2(block sum) against the block index over the later half of the
    complete dyadic blocks; the fitted term exponent is 1 - slope.  Returns
    (fit, verdict, flags); the verdict is CONVERGENT above the margin,
    DIVERGENT below, INCONCLUSIVE in between or on insufficient data.
    """
    terms = np.asarray(terms, dtype=float)
    if terms.ndim != 1:
        raise ValueError("terms must be one-dimensional")
    if np.any(terms < 0) or np.any(~np.isfinite(terms)):
        raise ValueError("terms must be finite and nonnegative")
    if not np.any(terms > 0):
        return None, Verdict.CONVERGENT, ("zero-series",)

    js, sums = _dyadic_block_sums(terms)
    nb = len(js)
    if nb < min_blocks:
        return None, Verdict.INCONCLUSIVE, ("insufficient-data",)

    # A fully zero tail makes the observed sum a finite sum.
    last_pos_block = int(np.max(js[sums > 0]))
    if last_pos_block <= nb - 3:
        return None, Verdict.CONVERGENT, ("zero-tail",)

    keep = max(min_blocks, nb // 2)
    js_fit, sums_fit = js[-keep:], sums[-keep:]
    pos = sums_fit > 0
    flags: tuple[str, ...] = ()
    if pos.sum() < min_blocks:
        return None, Verdict.INCONCLUSIVE, ("insufficient-data", "sparse-blocks")
    if not pos.all():
        flags = ("sparse-blocks",)
    slope, hw, resid = _ols_line(js_fit[pos], np.log2(sums_fit[pos]))
    fit = SlopeFit(exponent=1.0 - slope, half_width=hw, residual=resid)
    if fit.exponent >= CONVERGENT_EXPONENT:
        return fit, Verdict.CONVERGENT, flags
    if fit.exponent <= DIVERGENT_EXPONENT:
        return fit, Verdict.DIVERGENT, flags
    return fit, Verdict.INCONCLUSIVE, flags


def _harmonic_comparison(terms: np.ndarray) -> bool:
    """True when n * a_n stays bounded away from zero over the tail blocks.

    The escalation rule for analytic sources whose fitted exponent lands in
    the inconclusive band: such terms dominate c/n, so the series diverges by
    direct comparison.  Scale invariant by construction.
    """
    n = len(terms)
    ns = np.arange(1, n + 1, dtype=float)
    weighted = ns * terms
    js, _ = _dyadic_block_sums(terms)
    nb = len(js)
    if nb < MIN_FIT_BLOCKS:
        return False
    mins = []
    for j in range(nb // 2, nb):
        lo, hi = 2**j, 2 ** (j + 1) - 1
        mins.append(weighted[lo - 1 : hi].min())
    mins = np.asarray(mins)
    if np.any(mins <= 0):
        return False
    return bool(mins[-1] >= 0.5 * mins[0])


def _report_grid(horizon: int) -> np.ndarray:
    """Dyadic boundaries plus the horizon itself; the rows emitted to CSV."""
    ns = [2**j for j in range(0, horizon.bit_length()) if 2**j <= horizon]
    if ns[-1] != horizon:
        ns.append(horizon)
    return np.asarray(ns, dtype=np.int64)


def _finalize(
    source: str,
    dense: np.ndarray,
    horizon: int,
    verdict: Verdict,
    evidence: str,
    fit: SlopeFit | None,
    flags: tuple[str, ...],
    grid_ns: np.ndarray | None = None,
    grid_terms: np.ndarray | None = None,
    grid_std_errs: np.ndarray | None = None,
) -> SeriesDiagnostic:
    partial = np.cumsum(dense)
    if grid_ns is None:
        grid_ns = _report_grid(horizon)
        grid_terms = dense[grid_ns - 1]
    return SeriesDiagnostic(
        source=source,
        verdict=verdict,
        evidence=evidence,
        horizon=horizon,
        total=float(partial[-1]),
        grid_ns=np.asarray(grid_ns, dtype=np.int64),
        grid_terms=np.asarray(grid_terms, dtype=float),
        grid_partial_sums=partial[np.asarray(grid_ns, dtype=np.int64) - 1],
        grid_std_errs=grid_std_errs,
        fit=fit,
        flags=flags,
    )


def diagnose_analytic_series(
    term_fn: Callable[[np.ndarray], np.ndarray],
    horizon: int,
    *,
    form: SeriesForm | None = None,
    flags: tuple[str, ...] = (),
) -> SeriesDiagnostic:
    """Evaluate exact terms over n = 1..horizon and attach a verdict.

    With a recognized ``form`` the verdict is the exact comparison; otherwise
    the dyadic fit decides, with the harmonic-comparison escalation for
    fitted exponents inside the inconclusive band.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    ns = np.arange(1, horizon + 1, dtype=np.int64)
    dense = np.asarray(term_fn(ns), dtype=float)
    if dense.shape != ns.shape:
        raise ValueError("term function must return one value per n")
    if np.any(np.isnan(dense)) or np.any(dense < 0):
        raise ValueError("series terms must be nonnegative (and not NaN)")

    if np.any(np.isinf(dense)):
        return _finalize(
            "analytic",
            np.where(np.isinf(dense), 0.0, dense),  # keep partial sums finite in reports
            horizon,
            Verdict.DIVERGENT,
            "terms are not finite",
            None,
            flags + ("infinite-terms",),
        )

    fit, verdict, fit_flags = fit_tail_exponent(dense)
    evidence = "dyadic tail-exponent fit"
    if form is not None:
        verdict = form.verdict()
        evidence = form.describe()
    elif verdict is Verdict.INCONCLUSIVE and "insufficient-data" not in fit_flags:
        if _harmonic_comparison(dense):
            verdict = Verdict.DIVERGENT
            evidence = "harmonic comparison: n * a_n bounded away from zero"
            fit_flags = fit_flags + ("harmonic-comparison",)
    elif verdict is Verdict.CONVERGENT and fit is None:
        evidence = "all observed terms zero" if "zero-series" in fit_flags else "zero tail"
    return _finalize("analytic", dense, horizon, verdict, evidence, fit, flags + fit_flags)


def power_law_interpolate(
    grid_ns: np.ndarray, grid_values: np.ndarray, horizon: int
) -> np.ndarray:
    """Dense 1..horizon sequence through the grid assuming local power laws.

    Segments with a zero endpoint fall back to zero fill; the leading segment
    extrapolates the first local exponent down to n = 1, the trailing one
    continues the last local exponent out to the horizon.
    """
    grid_ns = np.asarray(grid_ns, dtype=float)
    grid_values = np.asarray(grid_values, dtype=float)
    if len(grid_ns) < 2:
        dense = np.zeros(horizon)
        dense[int(grid_ns[0]) - 1 :] = grid_values[0]
        return dense
    ns = np.arange(1, horizon + 1, dtype=float)
    dense = np.zeros(horizon)
    logs = np.zeros(len(grid_ns))
    positive = grid_values > 0
    logs[positive] = np.log(grid_values[positive])
    slopes = np.zeros(len(grid_ns) - 1)
    for i in range(len(grid_ns) - 1):
        if positive[i] and positive[i + 1]:
            slopes[i] = (logs[i + 1] - logs[i]) / math.log(grid_ns[i + 1] / grid_ns[i])
    for i in range(len(grid_ns) - 1):
        lo = 1 if i == 0 else int(grid_ns[i])
        hi = horizon if i == len(grid_ns) - 2 else int(grid_ns[i + 1]) - 1
        if hi < lo:
            continue
        if not positive[i] or not positive[i + 1]:
            anchor = grid_values[i] if positive[i] else 0.0
            seg = np.where(ns[lo - 1 : hi] == grid_ns[i], anchor, 0.0) if anchor else 0.0
            dense[lo - 1 : hi] = seg
            continue
        dense[lo - 1 : hi] = grid_values[i] * (ns[lo - 1 : hi] / grid_ns[i]) ** slopes[i]
    # exact values at the grid points themselves
    for gn, gv in zip(grid_ns, grid_values):
        if 1 <= gn <= horizon:
            dense[int(gn) - 1] = gv
    return dense


def diagnose_empirical_series(
    grid_ns: np.ndarray,
    grid_terms: np.ndarray,
    horizon: int,
    *,
    std_errs: np.ndarray | None = None,
    low_count_mask: np.ndarray | None = None,
    all_zero_is_degenerate: bool = False,
    flags: tuple[str, ...] = (),
) -> SeriesDiagnostic:
    """Diagnose Monte Carlo terms estimated on a geometric grid.

    Partial sums between grid points use the local power-law interpolation.
    ``low_count_mask`` marks grid terms backed by fewer than the event-count
    floor; when such terms dominate the tail a CONVERGENT fit is demoted to
    INCONCLUSIVE rather than trusted.
    """
    grid_ns = np.asarray(grid_ns, dtype=np.int64)
    grid_terms = np.asarray(grid_terms, dtype=float)
    if np.any(~np.isfinite(grid_terms)):
        raise ValueError("empirical terms must be finite")
    if np.any(grid_terms < 0):
        raise ValueError("empirical terms must be nonnegative")

    if not np.any(grid_terms > 0):
        if all_zero_is_degenerate:
            dense = np.zeros(horizon)
            return _finalize(
                "empirical", dense, horizon, Verdict.CONVERGENT,
                "all estimates zero", None, flags + ("degenerate",),
                grid_ns, grid_terms, std_errs,
            )
        dense = np.zeros(horizon)
        return _finalize(
            "empirical", dense, horizon, Verdict.INCONCLUSIVE,
            "all estimates zero at this replication level", None,
            flags + ("noise-floor",), grid_ns, grid_terms, std_errs,
        )

    dense = power_law_interpolate(grid_ns, grid_terms, horizon)
    fit, verdict, fit_flags = fit_tail_exponent(dense)
    evidence = "dyadic tail-exponent fit on interpolated terms"
    out_flags = flags + fit_flags
    if low_count_mask is not None and len(low_count_mask):
        tail = np.asarray(low_count_mask, dtype=bool)[len(low_count_mask) // 2 :]
        if tail.mean() >= 0.5 and verdict is Verdict.CONVERGENT:
            verdict = Verdict.INCONCLUSIVE
            evidence = "tail estimates sit below the event-count floor"
            out_flags = out_flags + ("noise-floor",)
    return _finalize(
        "empirical", dense, horizon, verdict, evidence, fit, out_flags,
        grid_ns, grid_terms, std_errs,
    )
