"""Quantitative experiments on running means of iid draws.

Moment curves of S_n/n, per-path strong-a.s. series, weighted tail and
truncated-moment series, and the growth-exponent check for E|S_n|^alpha.
All Monte Carlo outputs are deterministic functions of (model, parameters,
seed): replicates are keyed by substream, workers return per-replicate
values, and reductions run over the replicate axis in index order, so the
results are invariant to the worker count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .distributions import DistributionSpec, Family, UnsupportedQuery
from .models import IidMeanModel, PathSample, SequenceModel
from .rng import RngStream
from .series import (
    SeriesDiagnostic,
    SeriesForm,
    SlopeFit,
    diagnose_analytic_series,
    diagnose_empirical_series,
    fit_loglog_slope,
)

__all__ = [
    "MomentCurve",
    "StatKind",
    "StatSpec",
    "simulate_statistics",
    "estimate_pth_moment_of_mean",
    "strong_lp_series",
    "normal_mean_moment_terms",
    "strong_as_path_series",
    "path_series_batch",
    "baum_katz_series",
    "chow_complete_moment_series",
    "weighted_moment_series",
    "raw_moment_curve",
    "bdg_slope_check",
    "geometric_grid",
]

LOW_COUNT_FLOOR = 10  # Monte Carlo event counts below this are noise-flagged


def geometric_grid(horizon: int, ratio: float = 2.0, start: int = 1) -> np.ndarray:
    """ceil(ratio**j) grid points up to and including the horizon."""
    if not ratio > 1.0:
        raise ValueError("grid ratio must exceed 1")
    points = []
    value = float(max(start, 1))
    while value <= horizon:
        points.append(int(math.ceil(value)))
        value *= ratio
    if not points or points[-1] != horizon:
        points.append(int(horizon))
    return np.unique(np.asarray(points, dtype=np.int64))


# -- replicate simulation ------------------------------------------------------


class StatKind(enum.Enum):
    MEAN_ABS_POW = "mean-abs-pow"      # |S_n/n - mu|**p
    RAW_ABS_POW = "raw-abs-pow"        # |S_n - n mu|**p
    TAIL_INDICATOR = "tail-indicator"  # 1{|S_n - n mu| > n eps}
    TRUNC_EXCESS = "trunc-excess"      # (|S_n - n mu| - eps n**(1/p))+
    PATH_SERIES = "path-series"        # cumsum |S_m/m - mu|**alpha at checkpoints


@dataclass(frozen=True)
class StatSpec:
    kind: StatKind
    p: float | None = None
    eps: float | None = None
    alpha: float | None = None


def _simulate_block(
    model: IidMeanModel,
    stat: StatSpec,
    grid: np.ndarray,
    rng: RngStream,
    rep_start: int,
    rep_stop: int,
) -> np.ndarray:
    """Per-replicate statistics for replicates [rep_start, rep_stop).

    Must stay a pure function of its arguments: it runs identically inline
    and inside worker processes.
    """
    mu = model.dist.center()
    n_max = int(grid[-1])
    ns = np.arange(1, n_max + 1, dtype=float)
    out = np.empty((rep_stop - rep_start, len(grid)))
    for i, rep in enumerate(range(rep_start, rep_stop)):
        gen = rng.substream(rep).generator()
        draws = model.dist.quantile(gen.random(n_max))
        centered = np.cumsum(draws - mu)
        if stat.kind is StatKind.PATH_SERIES:
            terms = np.abs(centered / ns) ** stat.alpha
            totals = np.cumsum(terms)
            out[i] = totals[grid - 1]
            continue
        at = centered[grid - 1]
        gridf = grid.astype(float)
        if stat.kind is StatKind.MEAN_ABS_POW:
            out[i] = np.abs(at / gridf) ** stat.p
        elif stat.kind is StatKind.RAW_ABS_POW:
            out[i] = np.abs(at) ** stat.p
        elif stat.kind is StatKind.TAIL_INDICATOR:
            out[i] = (np.abs(at) > gridf * stat.eps).astype(float)
        elif stat.kind is StatKind.TRUNC_EXCESS:
            out[i] = np.maximum(np.abs(at) - stat.eps * gridf ** (1.0 / stat.p), 0.0)
        else:  # pragma: no cover
            raise ValueError(f"unknown stat {stat.kind}")
    return out


def simulate_statistics(
    model: IidMeanModel,
    stat: StatSpec,
    grid: np.ndarray,
    reps: int,
    rng: RngStream,
    jobs: int = 1,
) -> np.ndarray:
    """(reps, len(grid)) per-replicate statistics, replicate r on substream r.

    The block partition is fixed (independent of ``jobs``), so scheduling
    never changes a single bit of the result.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    grid = np.asarray(grid, dtype=np.int64)
    if np.any(np.diff(grid) <= 0) or grid[0] < 1:
        raise ValueError("grid must be strictly increasing positive integers")
    n_max = int(grid[-1])
    block = max(1, min(reps, 8_000_000 // max(n_max, 1)))
    bounds = [(lo, min(lo + block, reps)) for lo in range(0, reps, block)]
    if jobs <= 1 or len(bounds) == 1:
        parts = [_simulate_block(model, stat, grid, rng, lo, hi) for lo, hi in bounds]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_simulate_block, model, stat, grid, rng, lo, hi)
                for lo, hi in bounds
            ]
            parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


# -- moment curves ---------------------------------------------------------------


@dataclass
class MomentCurve:
    """Monte Carlo estimates of E|S_n/n - mu|**p over a grid of n."""

    grid: np.ndarray
    estimates: np.ndarray
    std_errors: np.ndarray
    reps: int
    p: float
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.estimates < 0) or np.any(self.std_errors < 0):
            raise ValueError("estimates and standard errors must be nonnegative")

    def to_payload(self) -> dict:
        return {
            "p": self.p,
            "reps": self.reps,
            "grid": [int(n) for n in self.grid],
            "estimates": [float(v) for v in self.estimates],
            "std_errors": [float(v) for v in self.std_errors],
            "flags": list(self.flags),
        }


def _require_iid_mean(model: SequenceModel) -> IidMeanModel:
    if not isinstance(model, IidMeanModel):
        raise ValueError(f"this experiment needs an iid-mean model, got {model.token}")
    return model


def estimate_pth_moment_of_mean(
    model: SequenceModel,
    p: float,
    grid,
    reps: int,
    rng: RngStream,
    jobs: int = 1,
) -> MomentCurve:
    """Sample mean of |S_n/n - mu|**p at each grid point over shared paths.

    One path per replicate is evaluated at every grid point (common random
    numbers across n), which is what makes log-log slopes tight.
    """
    model = _require_iid_mean(model)
    if not p > 0:
        raise ValueError("p must be positive")
    if reps < 2:
        raise ValueError("reps must be at least 2 for a standard error")
    if model.dist.mean() is None:
        raise ValueError(f"{model.token} has no mean to center at")
    grid = np.asarray(grid, dtype=np.int64)
    values = simulate_statistics(model, StatSpec(StatKind.MEAN_ABS_POW, p=p), grid, reps, rng, jobs)
    estimates = values.mean(axis=0)
    std_errors = values.std(axis=0, ddof=1) / math.sqrt(reps)
    flags = ()
    if not model.dist.has_abs_moment(p):
        flags = ("moment-order",)  # estimate may not stabilize; not an error
    return MomentCurve(grid=grid, estimates=estimates, std_errors=std_errors,
                       reps=reps, p=p, flags=flags)


def normal_mean_moment_terms(p: float, sigma: float = 1.0):
    """Exact E|S_n/n|**p for centered normal draws: m_p * n**(-p/2)."""
    m_p = DistributionSpec(Family.NORMAL, scale=sigma).abs_moment(p)
    return (lambda ns: m_p * ns.astype(float) ** (-p / 2.0)), SeriesForm("power", power=p / 2.0)


def strong_lp_series(
    source,
    horizon: int,
    *,
    form: SeriesForm | None = None,
) -> SeriesDiagnostic:
    """Partial sums of sum_n E|S_n/n - mu|**p with a convergence verdict.

    ``source`` is either a MomentCurve (empirical route; grid estimates are
    carried to a dense sequence by local power-law interpolation) or a
    callable n -> a_n of exact terms, optionally with its closed ``form``.
    """
    if isinstance(source, MomentCurve):
        return diagnose_empirical_series(
            source.grid,
            source.estimates,
            horizon,
            std_errs=source.std_errors,
            all_zero_is_degenerate=True,
            flags=source.flags,
        )
    if callable(source):
        return diagnose_analytic_series(source, horizon, form=form)
    raise TypeError("source must be a MomentCurve or a term callable")


def strong_as_path_series(path: PathSample, alpha: float, mu: float) -> np.ndarray:
    """T_n = sum_{m<=n} |values[m] - mu|**alpha along one realized path."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return np.cumsum(np.abs(path.values - mu) ** alpha)


def path_series_batch(
    model: SequenceModel,
    alpha: float,
    checkpoints,
    paths: int,
    rng: RngStream,
    jobs: int = 1,
) -> np.ndarray:
    """(paths, len(checkpoints)) matrix of T_n values over seeded paths."""
    model = _require_iid_mean(model)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    return simulate_statistics(
        model, StatSpec(StatKind.PATH_SERIES, alpha=alpha), checkpoints, paths, rng, jobs
    )


# -- weighted tail and moment series ----------------------------------------------


def _normal_abs_tail(model: IidMeanModel, eps: float, ns: np.ndarray) -> np.ndarray:
    sigma = model.dist.scale
    return special.erfc(eps * np.sqrt(ns.astype(float)) / (sigma * math.sqrt(2.0)))


def _rademacher_abs_tail(model: IidMeanModel, eps: float, ns: np.ndarray) -> np.ndarray:
    # S_n = scale * (2B - n), B ~ Binomial(n, 1/2); exact binomial boundaries
    scale = model.dist.scale
    nsf = ns.astype(float)
    cut = nsf * eps / scale
    upper = np.floor((nsf + cut) / 2.0)  # P(S > n eps) = P(B > (n + cut)/2)
    lower = np.ceil((nsf - cut) / 2.0) - 1.0  # P(S < -n eps) = P(B <= ...)
    up = stats.binom.sf(upper, ns, 0.5)
    down = stats.binom.cdf(lower, ns, 0.5)
    return up + down


_ANALYTIC_TAILS = (Family.NORMAL, Family.CAUCHY, Family.POINT_MASS, Family.RADEMACHER)


def _centered_sum_tail(model: IidMeanModel, eps: float):
    """(term function, form) for P(|S_n - n mu| > n eps) when closed form exists."""
    fam = model.dist.family
    if fam is Family.POINT_MASS:
        return (lambda ns: np.zeros(len(ns))), SeriesForm("zero")
    if fam is Family.NORMAL and model.dist.truncation is None:
        return (lambda ns: _normal_abs_tail(model, eps, ns)), None
    if fam is Family.CAUCHY:
        # S_n/n is again standard-scale Cauchy, so the tail never shrinks
        level = 1.0 - (2.0 / math.pi) * math.atan(eps / model.dist.scale)
        return (lambda ns: np.full(len(ns), level)), SeriesForm("constant", level=level)
    if fam is Family.RADEMACHER:
        return (lambda ns: _rademacher_abs_tail(model, eps, ns)), None
    raise UnsupportedQuery(f"no closed-form sum tail for {model.dist.token}")


def baum_katz_series(
    model: SequenceModel,
    alpha: float,
    epsilon: float,
    horizon: int,
    reps: int,
    rng: RngStream,
    *,
    method: str = "auto",
    grid_ratio: float = 2.0,
    jobs: int = 1,
) -> SeriesDiagnostic:
    """The weighted tail series sum_n n**(alpha-2) P(|S_n| > n eps).

    Finiteness for every eps characterizes a finite alpha-th absolute moment
    with mean zero, so the verdict doubles as a moment diagnostic.  Closed
    forms are used when the draw family admits one; otherwise tail
    probabilities are estimated over shared replicate paths with the
    event-count noise floor.
    """
    model = _require_iid_mean(model)
    if not alpha >= 1:
        raise ValueError("alpha must be at least 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")

    weight = lambda ns: ns.astype(float) ** (alpha - 2.0)
    if method not in ("auto", "analytic", "monte-carlo"):
        raise ValueError("method must be auto, analytic or monte-carlo")
    use_analytic = method == "analytic" or (
        method == "auto" and model.dist.family in _ANALYTIC_TAILS and model.dist.truncation is None
    )
    if use_analytic:
        tail_fn, tail_form = _centered_sum_tail(model, epsilon)
        form = None
        if tail_form is not None:
            if tail_form.kind == "zero":
                form = tail_form
            elif tail_form.kind == "constant":
                form = (
                    SeriesForm("constant", level=tail_form.level)
                    if alpha == 2.0
                    else SeriesForm("power", power=2.0 - alpha)
                )
        return diagnose_analytic_series(lambda ns: weight(ns) * tail_fn(ns), horizon, form=form)

    grid = geometric_grid(horizon, grid_ratio)
    values = simulate_statistics(
        model, StatSpec(StatKind.TAIL_INDICATOR, eps=epsilon), grid, reps, rng, jobs
    )
    probs = values.mean(axis=0)
    counts = values.sum(axis=0)
    std_errs = values.std(axis=0, ddof=1) / math.sqrt(reps)
    return diagnose_empirical_series(
        grid,
        weight(grid) * probs,
        horizon,
        std_errs=weight(grid) * std_errs,
        low_count_mask=counts < LOW_COUNT_FLOOR,
    )


def _normal_trunc_excess(sigma_n: np.ndarray, a: np.ndarray) -> np.ndarray:
    """E(|Z sigma| - a)+ for Z standard normal: exact via phi and the tail."""
    b = a / sigma_n
    phi = np.exp(-0.5 * b * b) / math.sqrt(2.0 * math.pi)
    return 2.0 * sigma_n * (phi - b * 0.5 * special.erfc(b / math.sqrt(2.0)))


def chow_complete_moment_series(
    model: SequenceModel,
    alpha: float,
    p: float | None = None,
    epsilon: float | None = None,
    *,
    horizon: int,
    reps: int,
    rng: RngStream,
    variant: int = 1,
    method: str = "auto",
    grid_ratio: float = 2.0,
    jobs: int = 1,
) -> SeriesDiagnostic:
    """Complete-moment series in the style of truncated-excess summability.

    Variant 1: sum_n n**(alpha/p - 1/p - 2) E(|S_n| - eps n**(1/p))+ with
    alpha >= 1, p <= alpha, p < 2.  Variant 2: sum_n n**-2 E|S_n|**alpha with
    1 < alpha < 2.  The moment hypothesis behind each variant is checked and
    reported as a flag, not enforced.
    """
    model = _require_iid_mean(model)
    if variant == 1:
        if p is None or epsilon is None:
            raise ValueError("variant 1 needs p and epsilon")
        if not (alpha >= 1 and p <= alpha and p < 2 and p > 0):
            raise ValueError("variant 1 requires alpha >= 1, 0 < p <= alpha, p < 2")
        exponent = alpha / p - 1.0 / p - 2.0
        hypothesis_ok = model.dist.has_abs_moment(alpha) and model.dist.has_abs_moment(1.0, log_factor=True)
    elif variant == 2:
        if not (1.0 < alpha < 2.0):
            raise ValueError("variant 2 requires 1 < alpha < 2")
        exponent = -2.0
        hypothesis_ok = model.dist.has_abs_moment(alpha, log_factor=True)
    else:
        raise ValueError("variant must be 1 or 2")
    flags = () if hypothesis_ok else ("moment-hypothesis-unmet",)

    weight = lambda ns: ns.astype(float) ** exponent
    is_normal = model.dist.family is Family.NORMAL and model.dist.truncation is None
    is_degenerate = model.dist.family is Family.POINT_MASS
    use_analytic = method == "analytic" or (method == "auto" and (is_normal or is_degenerate))

    if use_analytic:
        if is_degenerate:
            return diagnose_analytic_series(
                lambda ns: np.zeros(len(ns)), horizon, form=SeriesForm("zero"), flags=flags
            )
        if not is_normal:
            raise UnsupportedQuery(f"no closed-form truncated excess for {model.dist.token}")
        sigma = model.dist.scale
        if variant == 1:
            def terms(ns: np.ndarray) -> np.ndarray:
                nsf = ns.astype(float)
                return weight(ns) * _normal_trunc_excess(sigma * np.sqrt(nsf),
                                                         epsilon * nsf ** (1.0 / p))
            return diagnose_analytic_series(terms, horizon, flags=flags)
        m_alpha = DistributionSpec(Family.NORMAL, scale=sigma).abs_moment(alpha)
        return diagnose_analytic_series(
            lambda ns: m_alpha * ns.astype(float) ** (alpha / 2.0 - 2.0),
            horizon,
            form=SeriesForm("power", power=2.0 - alpha / 2.0),
            flags=flags,
        )

    grid = geometric_grid(horizon, grid_ratio)
    if variant == 1:
        stat = StatSpec(StatKind.TRUNC_EXCESS, p=p, eps=epsilon)
    else:
        stat = StatSpec(StatKind.RAW_ABS_POW, p=alpha)
    values = simulate_statistics(model, stat, grid, reps, rng, jobs)
    estimates = values.mean(axis=0)
    std_errs = values.std(axis=0, ddof=1) / math.sqrt(reps)
    low_counts = (values > 0).sum(axis=0) < LOW_COUNT_FLOOR if variant == 1 else None
    return diagnose_empirical_series(
        grid,
        weight(grid) * estimates,
        horizon,
        std_errs=weight(grid) * std_errs,
        low_count_mask=low_counts,
        flags=flags,
    )


def weighted_moment_series(
    model: SequenceModel,
    p: float,
    weight_exponent: float,
    horizon: int,
    reps: int,
    rng: RngStream,
    *,
    grid_ratio: float = 2.0,
    jobs: int = 1,
) -> SeriesDiagnostic:
    """sum_n n**(-weight_exponent) E|S_n - n mu|**p, Monte Carlo estimated."""
    model = _require_iid_mean(model)
    grid = geometric_grid(horizon, grid_ratio)
    values = simulate_statistics(model, StatSpec(StatKind.RAW_ABS_POW, p=p), grid, reps, rng, jobs)
    estimates = values.mean(axis=0)
    std_errs = values.std(axis=0, ddof=1) / math.sqrt(reps)
    w = grid.astype(float) ** (-weight_exponent)
    return diagnose_empirical_series(grid, w * estimates, horizon, std_errs=w * std_errs)


def raw_moment_curve(
    model: SequenceModel,
    p: float,
    grid,
    reps: int,
    rng: RngStream,
    jobs: int = 1,
) -> MomentCurve:
    """Monte Carlo estimates of E|S_n - n mu|**p over a grid of n."""
    model = _require_iid_mean(model)
    grid = np.asarray(grid, dtype=np.int64)
    values = simulate_statistics(model, StatSpec(StatKind.RAW_ABS_POW, p=p), grid, reps, rng, jobs)
    return MomentCurve(
        grid=grid,
        estimates=values.mean(axis=0),
        std_errors=values.std(axis=0, ddof=1) / math.sqrt(reps),
        reps=reps,
        p=p,
        flags=() if model.dist.has_abs_moment(p) else ("moment-order",),
    )


def bdg_slope_check(
    model: SequenceModel,
    alpha: float,
    grid,
    reps: int,
    rng: RngStream,
    jobs: int = 1,
    *,
    curve: MomentCurve | None = None,
) -> SlopeFit:
    """Fitted growth exponent of E|S_n - n mu|**alpha against n.

    For iid draws with a finite alpha-th moment the square-function bound
    caps the growth at n**(alpha/2), and central-limit scaling makes that
    exponent exact, so the fit should sit at alpha/2 up to noise.  A curve
    already estimated with the same parameters may be passed to avoid a
    second simulation.
    """
    model = _require_iid_mean(model)
    if not alpha > 2:
        raise ValueError("alpha must exceed 2")
    if model.dist.family is Family.POINT_MASS:
        raise ValueError("degenerate draws: all moments vanish and the slope is undefined")
    if not model.dist.has_abs_moment(alpha):
        raise ValueError(
            f"{model.dist.token} lacks a finite absolute moment of order {alpha:g}"
        )
    if model.dist.mean() is None:
        raise ValueError(f"{model.token} has no mean to center at")
    grid = np.asarray(grid, dtype=np.int64)
    if curve is None:
        curve = raw_moment_curve(model, alpha, grid, reps, rng, jobs)
    elif curve.p != alpha or not np.array_equal(curve.grid, grid):
        raise ValueError("the supplied curve does not match the requested check")
    for n, est in zip(grid, curve.estimates):
        if not math.isfinite(est):
            raise RuntimeError(f"moment estimate overflowed at grid point n={int(n)}")
    return fit_loglog_slope(grid, curve.estimates)
