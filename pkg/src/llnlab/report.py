"""Artifact emission: delimited output, JSON summaries, rendered figures.

Artifacts are written atomically (temp file, then rename) and embed the tool
version, the seed and an echo of the semantic configuration.  Scheduling
knobs (worker count, output directory) are excluded from the echo so that
runs differing only in those produce byte-identical files.  CSV numbers use
the shortest round-trip decimal representation.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .series import SeriesDiagnostic, SlopeFit

__all__ = [
    "run_stamp",
    "atomic_write_bytes",
    "atomic_write_text",
    "emit_json",
    "emit_csv",
    "series_rows",
    "fmt_cell",
    "render_series_figure",
    "render_curve_figure",
    "render_matrix_figure",
    "render_indices_figure",
    "render_histogram_figure",
    "stamp_line",
]

_EXCLUDED_FROM_ECHO = ("out", "jobs")


def run_stamp(command: str, params: Mapping, seed: int) -> dict:
    """Config echo embedded in every JSON artifact."""
    config = {
        k: v for k, v in sorted(params.items())
        if k not in _EXCLUDED_FROM_ECHO and v is not None
    }
    return {
        "tool": {"name": "llnlab", "version": __version__},
        "command": command,
        "seed": seed,
        "config": config,
    }


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def emit_json(path: str, payload: Mapping) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def stamp_line(stamp: Mapping) -> str:
    """One-line rendering of the config echo (shared by CSV and figures)."""
    echo = ";".join(f"{k}={v}" for k, v in stamp.get("config", {}).items())
    return (
        f"llnlab {__version__} | command={stamp.get('command', '')} | "
        f"seed={stamp.get('seed', '')} | {echo}"
    )


def emit_csv(path: str, header: Sequence[str], rows: Iterable[Sequence], *, stamp: Mapping) -> None:
    lines = ["# " + stamp_line(stamp), ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_cell(cell) for cell in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def series_rows(diag: SeriesDiagnostic) -> tuple[list[str], list[list]]:
    header = ["n", "term", "partial_sum", "std_err", "flags"]
    flags = ";".join(diag.flags)
    rows = []
    for i, n in enumerate(diag.grid_ns):
        err = None if diag.grid_std_errs is None else float(diag.grid_std_errs[i])
        rows.append([int(n), float(diag.grid_terms[i]), float(diag.grid_partial_sums[i]), err, flags])
    return header, rows


# -- figures -------------------------------------------------------------------


def _mpl():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: str, stamp: Mapping | None = None) -> None:
    metadata = {"Software": f"llnlab {__version__}"}
    if stamp is not None:
        metadata["Description"] = stamp_line(stamp)
    buffer = io.BytesIO()
    fig.savefig(buffer, format="png", dpi=140, metadata=metadata)
    atomic_write_bytes(path, buffer.getvalue())


def render_series_figure(path: str, title: str, diags: Mapping[str, SeriesDiagnostic],
                         stamp: Mapping | None = None) -> None:
    plt = _mpl()
    fig, (ax_terms, ax_sums) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    show_legend = len(diags) <= 6
    for label, diag in diags.items():
        positive = diag.grid_terms > 0
        if positive.any():
            ax_terms.loglog(diag.grid_ns[positive], diag.grid_terms[positive],
                            "o-", markersize=3, label=label)
        ax_sums.semilogx(diag.grid_ns, diag.grid_partial_sums, "-", label=label)
    ax_terms.set_xlabel("n")
    ax_terms.set_ylabel("term")
    ax_sums.set_xlabel("n")
    ax_sums.set_ylabel("partial sum")
    if show_legend:
        ax_terms.legend(fontsize=7)
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path, stamp)
    plt.close(fig)


def render_curve_figure(path: str, title: str, grid, estimates, std_errors,
                        fit: SlopeFit | None = None, stamp: Mapping | None = None) -> None:
    plt = _mpl()
    grid = np.asarray(grid, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.errorbar(grid, estimates, yerr=std_errors, fmt="o", capsize=3, label="estimate")
    if fit is not None and np.all(estimates > 0):
        anchor = estimates[0] / grid[0] ** fit.exponent
        ax.plot(grid, anchor * grid**fit.exponent, "--",
                label=f"slope {fit.exponent:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path, stamp)
    plt.close(fig)


_MATRIX_STYLE = {
    "SELF": ("=", 0.85),
    "IMPLIES": ("=>", 0.25),
    "IMPLIES_VIA_CLOSURE": ("->", 0.45),
    "IMPLIES_CONSTANT_LIMIT": ("=>c", 0.35),
    "IMPLIES_DISCRETE_OPEN_SUPPORT": ("=>d", 0.35),
    "NOT_IMPLIES": ("x", 0.0),
    "OPEN": ("?", 0.65),
    "UNADDRESSED": ("", 1.0),
}


def render_matrix_figure(path: str, modes: Sequence[str],
                         cells: Mapping[tuple[str, str], str],
                         stamp: Mapping | None = None) -> None:
    plt = _mpl()
    size = len(modes)
    shade = np.ones((size, size))
    fig, ax = plt.subplots(figsize=(7.2, 6.2))
    for i, src in enumerate(modes):
        for j, dst in enumerate(modes):
            symbol, value = _MATRIX_STYLE.get(cells.get((src, dst), "UNADDRESSED"), ("", 1.0))
            shade[i, j] = value
            if symbol:
                ax.text(j, i, symbol, ha="center", va="center", fontsize=8)
    ax.imshow(shade, cmap="Blues_r", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(size), modes, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(size), modes, fontsize=8)
    ax.set_xlabel("to")
    ax.set_ylabel("from")
    ax.set_title("implication matrix (rows imply columns)", fontsize=10)
    fig.tight_layout()
    _save(fig, path, stamp)
    plt.close(fig)


def render_indices_figure(path: str, title: str, indices,
                          stamp: Mapping | None = None) -> None:
    plt = _mpl()
    indices = np.asarray(indices, dtype=float)
    ks = np.arange(1, len(indices) + 1, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.loglog(ks, indices, "o-", markersize=3)
    ax.set_xlabel("k")
    ax.set_ylabel("selected index")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path, stamp)
    plt.close(fig)


def render_histogram_figure(path: str, title: str, values, threshold: float | None = None,
                            xlabel: str = "value", stamp: Mapping | None = None) -> None:
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.hist(np.asarray(values, dtype=float), bins=30, color="#4878a8")
    if threshold is not None:
        ax.axvline(threshold, color="#a84848", linestyle="--", label=f"threshold {threshold:g}")
        ax.legend(fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("paths")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    _save(fig, path, stamp)
    plt.close(fig)
