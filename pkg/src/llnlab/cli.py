"""Command-line front door: configure, run, emit artifacts.

Five subcommands: ``verify-lln``, ``counterexample``, ``relations``,
``estimate-series``, ``extract-subseq``.  Exit codes: 0 when every requested
check passes (or produces verdicts without a FAIL), 1 on a verification
failure (the message points at the evidence file), 2 on usage errors.

An optional config file (``--config``) holds flat ``key = value`` lines
mirroring the long flag names; explicit flags win on conflict.  The default
output directory honours the ``LLNLAB_OUT`` environment variable.  Results
are invariant to ``--jobs``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, lln, report
from .distributions import UnsupportedQuery, parse_distribution
from .models import IidMeanModel, parse_model
from .modes import (
    CheckConfig,
    ConvergenceMode,
    ExtractionStalled,
    check_mode,
    extract_strong_subsequence,
    log_weight_tail_series,
)
from . import counterexamples as cx
from .relations import MATRIX_MODES, full_relation_matrix
from .rng import make_rng_stream
from .series import diagnose_analytic_series, fit_loglog_slope

_FAMILIES = ("strong-lp", "baum-katz", "chow", "chow2", "weighted-moment", "log-weight")
_CHECKS = ("slp-analytic", "slp-mc", "sas-paths", "bdg", "all")
_QUANTITIES = ("pth-moment", "sup-norm", "tail-prob", "alpha-path-term")

_MATRIX_SYMBOLS = {
    "SELF": "=",
    "IMPLIES": "=>",
    "IMPLIES_VIA_CLOSURE": "->",
    "IMPLIES_CONSTANT_LIMIT": "=>c",
    "IMPLIES_DISCRETE_OPEN_SUPPORT": "=>d",
    "NOT_IMPLIES": "x",
    "OPEN": "?",
    "UNADDRESSED": "",
}

# Builtin defaults per subcommand; flags > config file > these.
_DEFAULTS: dict[str, dict] = {
    "verify-lln": {
        "seed": 1, "out": None, "format": "both", "figures": True, "jobs": 1,
        "check": "all", "dist": "normal", "p": 3.0, "alpha": "3,4",
        "grid": "100,1000,10000", "reps": 1000, "paths": 200, "horizon": 100_000,
        "series_horizon": 1_000_000,
    },
    "counterexample": {
        "seed": 1, "out": None, "format": "both", "figures": True, "jobs": 1,
        "mode": None, "quantity": None, "p": None, "alpha": None, "eps": None,
        "omega": 0.3, "horizon": 100_000,
    },
    "relations": {
        "seed": 1, "out": None, "format": "both", "figures": True, "jobs": 1,
        "corpus": "default", "horizon": 20_000,
    },
    "estimate-series": {
        "seed": 1, "out": None, "format": "both", "figures": True, "jobs": 1,
        "family": "baum-katz", "dist": "normal", "model": None, "alpha": 2.0,
        "p": None, "eps": 1.0, "beta": 1.0, "delta": 1.0, "weight_exponent": 3.0,
        "method": "auto", "horizon": 100_000, "reps": 1000, "grid_ratio": 2.0,
    },
    "extract-subseq": {
        "seed": 1, "out": None, "format": "both", "figures": True, "jobs": 1,
        "model": "exa-3.2", "alpha": 1.0, "k_max": 30, "index_cap": 100_000_000,
    },
}

_CONVERTERS: dict[str, type] = {
    "seed": int, "jobs": int, "reps": int, "paths": int, "horizon": int,
    "series_horizon": int, "k_max": int, "index_cap": int,
    "p": float, "alpha": float, "eps": float, "omega": float, "beta": float,
    "delta": float, "weight_exponent": float, "grid_ratio": float,
}
# verify-lln takes a comma list of growth orders
_CONVERTER_OVERRIDES: dict[tuple[str, str], type] = {("verify-lln", "alpha"): str}


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.rstrip()!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge argv values, config-file values and builtin defaults."""
    defaults = _DEFAULTS[command]
    file_values: dict[str, str] = {}
    if args.config:
        file_values = _read_config_file(args.config)
    resolved: dict = {}
    for key, default in defaults.items():
        argv_value = getattr(args, key, None)
        if argv_value is not None:
            resolved[key] = argv_value
            continue
        if key in file_values:
            raw = file_values.pop(key)
            if key == "figures":
                resolved[key] = _parse_bool(raw)
            else:
                convert = _CONVERTER_OVERRIDES.get((command, key), _CONVERTERS.get(key, str))
                resolved[key] = convert(raw)
            continue
        resolved[key] = default
    unknown = set(file_values) - set(defaults)
    if unknown:
        raise ValueError(f"config keys not understood by {command}: {sorted(unknown)}")
    if resolved["out"] is None:
        resolved["out"] = os.environ.get("LLNLAB_OUT", "llnlab-out")
    return resolved


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="base seed (default 1)")
    parser.add_argument("--out", default=None,
                        help="output directory (default $LLNLAB_OUT or ./llnlab-out)")
    parser.add_argument("--format", choices=("csv", "json", "both"), default=None,
                        help="artifact formats to write (default both)")
    parser.add_argument("--figures", dest="figures", action="store_true", default=None,
                        help="render figures next to the delimited output (default)")
    parser.add_argument("--no-figures", dest="figures", action="store_false", default=None)
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes; results are invariant to this")
    parser.add_argument("--config", default=None, help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llnlab",
        description="Seed-reproducible experiments on running-mean convergence "
                    "rates and summability-style convergence modes.",
    )
    parser.add_argument("--version", action="version", version=f"llnlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-lln", help="run the running-mean rate checks")
    _add_common(p)
    p.add_argument("--check", choices=_CHECKS, default=None)
    p.add_argument("--dist", default=None, help="draw distribution token")
    p.add_argument("--p", type=float, default=None, help="moment order for slp-mc")
    p.add_argument("--alpha", default=None, help="comma list of growth orders for bdg")
    p.add_argument("--grid", default=None, help="comma list of grid points")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None, help="path horizon for sas-paths")
    p.add_argument("--series-horizon", dest="series_horizon", type=int, default=None,
                   help="horizon for the analytic moment series")

    p = sub.add_parser("counterexample", help="evaluate or confirm a named example")
    _add_common(p)
    p.add_argument("name", choices=cx.EXAMPLE_NAMES)
    p.add_argument("--mode", default=None, help="convergence mode token to check")
    p.add_argument("--quantity", choices=_QUANTITIES, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)

    p = sub.add_parser("relations", help="verify the full implication matrix")
    _add_common(p)
    p.add_argument("--corpus", choices=("default",), default=None)
    p.add_argument("--horizon", type=int, default=None, help="series horizon per checker")

    p = sub.add_parser("estimate-series", help="diagnose one weighted series")
    _add_common(p)
    p.add_argument("--family", choices=_FAMILIES, default=None)
    p.add_argument("--dist", default=None)
    p.add_argument("--model", default=None, help="model token for log-weight")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--weight-exponent", dest="weight_exponent", type=float, default=None)
    p.add_argument("--method", choices=("auto", "analytic", "monte-carlo"), default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--grid-ratio", dest="grid_ratio", type=float, default=None)

    p = sub.add_parser("extract-subseq", help="greedy strongly-convergent subsequence")
    _add_common(p)
    p.add_argument("--model", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--k-max", dest="k_max", type=int, default=None)
    p.add_argument("--index-cap", dest="index_cap", type=int, default=None)

    return parser


def _want(cfg: dict, kind: str) -> bool:
    return cfg["format"] in (kind, "both")


def _path(cfg: dict, name: str) -> str:
    return os.path.join(cfg["out"], name)


# -- verify-lln ------------------------------------------------------------------


def _slp_analytic_check(cfg: dict) -> tuple[dict, dict]:
    horizon = cfg["series_horizon"]
    stamp = report.run_stamp("verify-lln", cfg, cfg["seed"])
    results, diags = [], {}
    for p in (1.0, 2.0, 2.5, 3.0):
        term_fn, form = lln.normal_mean_moment_terms(p)
        diag = lln.strong_lp_series(term_fn, horizon, form=form)
        expected = "DIVERGENT" if p <= 2.0 else "CONVERGENT"
        results.append({
            "p": p,
            "verdict": diag.verdict.value,
            "expected": expected,
            "partial_sum": diag.total,
            "passed": diag.verdict.value == expected,
        })
        diags[f"p={p:g}"] = diag
        if _want(cfg, "csv"):
            header, rows = report.series_rows(diag)
            report.emit_csv(_path(cfg, f"verify_lln_slp_analytic_p{p:g}.csv"),
                            header, rows, stamp=stamp)
    if cfg["figures"]:
        report.render_series_figure(
            _path(cfg, "verify_lln_slp_analytic.png"),
            "running-mean moment series, normal draws", diags, stamp=stamp,
        )
    return {"name": "slp-analytic", "passed": all(r["passed"] for r in results),
            "series": results}, diags


def _slp_mc_check(cfg: dict, rng) -> dict:
    grid = [int(v) for v in str(cfg["grid"]).split(",")]
    model = IidMeanModel(parse_distribution(cfg["dist"]))
    curve = lln.estimate_pth_moment_of_mean(model, cfg["p"], grid, cfg["reps"],
                                            rng.child(1), jobs=cfg["jobs"])
    fit = fit_loglog_slope(curve.grid, curve.estimates)
    expected = -cfg["p"] / 2.0
    passed = abs(fit.exponent - expected) <= 0.1
    stamp = report.run_stamp("verify-lln", cfg, cfg["seed"])
    if _want(cfg, "csv"):
        rows = [
            [int(n), float(e), float(s), ";".join(curve.flags)]
            for n, e, s in zip(curve.grid, curve.estimates, curve.std_errors)
        ]
        report.emit_csv(_path(cfg, "verify_lln_slp_mc.csv"),
                        ["n", "estimate", "std_error", "flags"], rows, stamp=stamp)
    if cfg["figures"]:
        report.render_curve_figure(
            _path(cfg, "verify_lln_slp_mc.png"),
            f"E|S_n/n|^{cfg['p']:g} against n ({cfg['dist']})",
            curve.grid, curve.estimates, curve.std_errors, fit, stamp=stamp,
        )
    return {
        "name": "slp-mc", "p": cfg["p"], "dist": cfg["dist"], "reps": cfg["reps"],
        "fitted_exponent": fit.exponent, "half_width": fit.half_width,
        "expected_exponent": expected, "tolerance": 0.1, "passed": passed,
    }


def _sas_paths_check(cfg: dict, rng) -> dict:
    horizon = cfg["horizon"]
    paths = cfg["paths"]
    model = IidMeanModel(parse_distribution("rademacher"))
    checkpoints = [max(1, horizon // 10), horizon]
    t2 = lln.path_series_batch(model, 2.0, checkpoints, paths, rng.child(2), jobs=cfg["jobs"])
    t4 = lln.path_series_batch(model, 4.0, checkpoints, paths, rng.child(3), jobs=cfg["jobs"])
    harmonic = float(np.sum(1.0 / np.arange(1, horizon + 1)))
    threshold = 0.5 * math.log(horizon)
    frac_above = float((t2[:, 1] >= threshold).mean())
    mean_t2 = float(t2[:, 1].mean())
    mean_ok = abs(mean_t2 - harmonic) <= 0.1 * harmonic
    increments = t4[:, 1] - t4[:, 0]
    frac_settled = float((increments < 0.01).mean())
    stamp = report.run_stamp("verify-lln", cfg, cfg["seed"])
    if _want(cfg, "csv"):
        rows = []
        for r in range(paths):
            rows.append([r, 2.0, float(t2[r, 0]), float(t2[r, 1]), None])
            rows.append([r, 4.0, float(t4[r, 0]), float(t4[r, 1]), float(increments[r])])
        report.emit_csv(_path(cfg, "verify_lln_sas_paths.csv"),
                        ["path", "alpha", "t_checkpoint", "t_end", "increment"],
                        rows, stamp=stamp)
    if cfg["figures"]:
        report.render_histogram_figure(
            _path(cfg, "verify_lln_sas_paths.png"),
            f"path series at n={horizon} (order 2), rademacher draws",
            t2[:, 1], threshold=threshold, xlabel="T_n", stamp=stamp,
        )
    return {
        "name": "sas-paths", "paths": paths, "horizon": horizon,
        "alpha2": {
            "mean": mean_t2, "expected_mean": harmonic, "mean_within_10pct": mean_ok,
            "threshold": threshold, "fraction_above_threshold": frac_above,
            "required_fraction": 0.95, "passed": mean_ok and frac_above >= 0.95,
        },
        "alpha4": {
            "fraction_settled": frac_settled, "tolerance": 0.01,
            "required_fraction": 0.95, "passed": frac_settled >= 0.95,
        },
        "passed": (mean_ok and frac_above >= 0.95) and frac_settled >= 0.95,
    }


def _bdg_check(cfg: dict, rng) -> dict:
    grid = [int(v) for v in str(cfg["grid"]).split(",")]
    model = IidMeanModel(parse_distribution(cfg["dist"]))
    alphas = [float(v) for v in str(cfg["alpha"]).split(",")]
    stamp = report.run_stamp("verify-lln", cfg, cfg["seed"])
    results, csv_rows = [], []
    for i, alpha in enumerate(alphas):
        curve = lln.raw_moment_curve(model, alpha, grid, cfg["reps"],
                                     rng.child(4 + i), jobs=cfg["jobs"])
        fit = lln.bdg_slope_check(model, alpha, grid, cfg["reps"], rng.child(4 + i),
                                  jobs=cfg["jobs"], curve=curve)
        passed = abs(fit.exponent - alpha / 2.0) <= 0.1
        results.append({
            "alpha": alpha, "fitted_exponent": fit.exponent,
            "half_width": fit.half_width, "expected_exponent": alpha / 2.0,
            "tolerance": 0.1, "passed": passed,
        })
        for n, e, s in zip(curve.grid, curve.estimates, curve.std_errors):
            csv_rows.append([float(alpha), int(n), float(e), float(s)])
        if cfg["figures"]:
            report.render_curve_figure(
                _path(cfg, f"verify_lln_bdg_alpha{alpha:g}.png"),
                f"E|S_n|^{alpha:g} against n ({cfg['dist']})",
                curve.grid, curve.estimates, curve.std_errors, fit, stamp=stamp,
            )
    if _want(cfg, "csv"):
        report.emit_csv(_path(cfg, "verify_lln_bdg.csv"),
                        ["alpha", "n", "estimate", "std_error"], csv_rows, stamp=stamp)
    return {"name": "bdg", "dist": cfg["dist"], "fits": results,
            "passed": all(r["passed"] for r in results)}


def _cmd_verify_lln(cfg: dict) -> int:
    rng = make_rng_stream(cfg["seed"], 0)
    checks = []
    which = cfg["check"]
    if which in ("slp-analytic", "all"):
        summary, _ = _slp_analytic_check(cfg)
        checks.append(summary)
    if which in ("slp-mc", "all"):
        checks.append(_slp_mc_check(cfg, rng))
    if which in ("sas-paths", "all"):
        checks.append(_sas_paths_check(cfg, rng))
    if which in ("bdg", "all"):
        checks.append(_bdg_check(cfg, rng))
    passed = all(c["passed"] for c in checks)
    payload = report.run_stamp("verify-lln", cfg, cfg["seed"])
    payload["results"] = {"passed": passed, "checks": checks}
    out = _path(cfg, "verify_lln.json")
    if _want(cfg, "json"):
        report.emit_json(out, payload)
    for c in checks:
        print(f"verify-lln {c['name']}: {'PASS' if c['passed'] else 'FAIL'}")
    if not passed:
        print(f"FAIL: evidence in {out}")
        return 1
    return 0


# -- counterexample ----------------------------------------------------------------


def _example_spec(cfg: dict) -> cx.ExampleSpec:
    alpha = cfg["alpha"] if cfg["alpha"] is not None else 1.0
    return cx.ExampleSpec(cfg["name"], alpha=alpha)


def _cmd_counterexample(cfg: dict) -> int:
    name = cfg["name"]
    base = "counterexample_" + name.replace("-", "_").replace(".", "_")
    stamp = report.run_stamp("counterexample", cfg, cfg["seed"])
    rng = make_rng_stream(cfg["seed"], 0)
    model = parse_model(name if name != "exa-3.4" else "exa-3.4:dist=normal")
    config = CheckConfig(horizon=min(cfg["horizon"], 200_000), rng=rng)

    if cfg["quantity"] is not None:
        spec = _example_spec(cfg)
        quantity = {
            "pth-moment": lambda: cx.PthMoment(cfg["p"] if cfg["p"] is not None else 1.0),
            "sup-norm": cx.SupNorm,
            "tail-prob": lambda: cx.TailProb(cfg["eps"] if cfg["eps"] is not None else 0.5),
            "alpha-path-term": lambda: cx.AlphaPathTerm(
                cfg["alpha"] if cfg["alpha"] is not None else 1.0, cfg["omega"]),
        }[cfg["quantity"]]()
        diag = diagnose_analytic_series(
            lambda ns: np.asarray(cx.example_series_term(spec, quantity, ns), dtype=float),
            cfg["horizon"],
            form=cx.example_series_form(spec, quantity),
        )
        payload = dict(stamp)
        payload["results"] = {
            "example": spec.token,
            "quantity": cfg["quantity"],
            "partial_sum": diag.total,
            "series": diag.to_payload(),
        }
        slug = f"{base}_{cfg['quantity']}"
        if _want(cfg, "csv"):
            header, rows = report.series_rows(diag)
            report.emit_csv(_path(cfg, f"{slug}.csv"), header, rows, stamp=stamp)
        if _want(cfg, "json"):
            report.emit_json(_path(cfg, f"{slug}.json"), payload)
        if cfg["figures"]:
            report.render_series_figure(_path(cfg, f"{slug}.png"),
                                        f"{name} {cfg['quantity']}",
                                        {cfg["quantity"]: diag}, stamp=stamp)
        print(f"counterexample {name} {cfg['quantity']}: partial sum {diag.total!r} "
              f"({diag.verdict.value})")
        return 0

    if cfg["mode"] is not None:
        mode = ConvergenceMode(cfg["mode"], p=cfg["p"], alpha=cfg["alpha"])
        verdict = check_mode(model, mode, config)
        payload = dict(stamp)
        payload["results"] = {"verdict": verdict.to_payload()}
        diag = verdict.diagnostics[0] if verdict.diagnostics else None
        if diag is not None:
            payload["results"]["series"] = diag.to_payload()
        slug = f"{base}_{mode.tag.replace('-', '_')}"
        if diag is not None and _want(cfg, "csv"):
            header, rows = report.series_rows(diag)
            report.emit_csv(_path(cfg, f"{slug}.csv"), header, rows, stamp=stamp)
        if _want(cfg, "json"):
            report.emit_json(_path(cfg, f"{slug}.json"), payload)
        if diag is not None and cfg["figures"]:
            report.render_series_figure(_path(cfg, f"{slug}.png"),
                                        f"{name} {mode.describe()}", {mode.describe(): diag},
                                        stamp=stamp)
        print(f"counterexample {name} {mode.describe()}: {verdict.verdict}")
        return 0

    # default: confirm every registered claim
    spec = _example_spec(cfg)
    expected = cx.example_expected_verdicts(spec)
    rows, ok = [], True
    for claim in expected.claims:
        mode = ConvergenceMode(claim.mode, **claim.params_dict())
        verdict = check_mode(model, mode, config)
        match = verdict.verdict == claim.expected
        ok = ok and match
        rows.append({
            "mode": mode.describe(), "expected": claim.expected,
            "computed": verdict.verdict, "method": verdict.method,
            "match": match, "note": claim.note,
        })
    payload = dict(stamp)
    payload["results"] = {"example": spec.token, "ok": ok, "claims": rows}
    if _want(cfg, "csv"):
        csv_rows = [[r["mode"], r["expected"], r["computed"], r["method"], r["match"]]
                    for r in rows]
        report.emit_csv(_path(cfg, f"{base}_claims.csv"),
                        ["mode", "expected", "computed", "method", "match"],
                        csv_rows, stamp=stamp)
    if _want(cfg, "json"):
        report.emit_json(_path(cfg, f"{base}.json"), payload)
    for r in rows:
        print(f"counterexample {name} {r['mode']}: expected {r['expected']}, "
              f"computed {r['computed']} ({'ok' if r['match'] else 'MISMATCH'})")
    if not ok:
        print(f"FAIL: evidence in {_path(cfg, base + '.json')}")
        return 1
    return 0


# -- relations ----------------------------------------------------------------------


def _cmd_relations(cfg: dict) -> int:
    config = CheckConfig(horizon=cfg["horizon"], rng=make_rng_stream(cfg["seed"], 0))
    rep = full_relation_matrix(seed=cfg["seed"], config=config)
    payload = report.run_stamp("relations", cfg, cfg["seed"])
    payload["results"] = rep.to_payload()
    out = _path(cfg, "relation_matrix.json")
    if _want(cfg, "json"):
        report.emit_json(out, payload)
    if _want(cfg, "csv"):
        header = ["mode"] + list(MATRIX_MODES)
        rows = []
        for src in MATRIX_MODES:
            rows.append([src] + [_MATRIX_SYMBOLS[rep.matrix[(src, dst)]] for dst in MATRIX_MODES])
        report.emit_csv(_path(cfg, "relation_matrix.csv"), header, rows,
                        stamp=report.run_stamp("relations", cfg, cfg["seed"]))
    if cfg["figures"]:
        report.render_matrix_figure(_path(cfg, "relation_matrix.png"), MATRIX_MODES, rep.matrix,
                                    stamp=payload)
    for outcome in rep.edge_outcomes:
        print(f"relations {outcome.edge.describe()}: {outcome.outcome}")
    print(f"relations: {'PASS' if rep.ok else 'FAIL'} "
          f"({len(rep.edge_outcomes)} edges, corpus of {len(rep.corpus)})")
    if not rep.ok:
        print(f"FAIL: evidence in {out}")
        return 1
    return 0


# -- estimate-series -----------------------------------------------------------------


def _cmd_estimate_series(cfg: dict) -> int:
    rng = make_rng_stream(cfg["seed"], 0)
    family = cfg["family"]
    horizon, reps = cfg["horizon"], cfg["reps"]
    p = cfg["p"]
    if family == "strong-lp":
        dist = parse_distribution(cfg["dist"])
        order = p if p is not None else 3.0
        if cfg["method"] in ("auto", "analytic") and dist.family.value == "normal":
            term_fn, form = lln.normal_mean_moment_terms(order, dist.scale)
            diag = lln.strong_lp_series(term_fn, horizon, form=form)
        else:
            model = IidMeanModel(dist)
            grid = lln.geometric_grid(horizon, cfg["grid_ratio"])
            curve = lln.estimate_pth_moment_of_mean(model, order, grid, reps, rng,
                                                    jobs=cfg["jobs"])
            diag = lln.strong_lp_series(curve, horizon)
        params = {"p": order, "dist": cfg["dist"]}
    elif family == "baum-katz":
        model = IidMeanModel(parse_distribution(cfg["dist"]))
        diag = lln.baum_katz_series(model, cfg["alpha"], cfg["eps"], horizon, reps, rng,
                                    method=cfg["method"], grid_ratio=cfg["grid_ratio"],
                                    jobs=cfg["jobs"])
        params = {"alpha": cfg["alpha"], "eps": cfg["eps"], "dist": cfg["dist"]}
    elif family in ("chow", "chow2"):
        model = IidMeanModel(parse_distribution(cfg["dist"]))
        variant = 1 if family == "chow" else 2
        diag = lln.chow_complete_moment_series(
            model, cfg["alpha"], p=p, epsilon=cfg["eps"], horizon=horizon, reps=reps,
            rng=rng, variant=variant, method=cfg["method"], grid_ratio=cfg["grid_ratio"],
            jobs=cfg["jobs"])
        params = {"alpha": cfg["alpha"], "p": p, "eps": cfg["eps"], "dist": cfg["dist"]}
    elif family == "weighted-moment":
        model = IidMeanModel(parse_distribution(cfg["dist"]))
        order = p if p is not None else 3.0
        diag = lln.weighted_moment_series(model, order, cfg["weight_exponent"], horizon,
                                          reps, rng, grid_ratio=cfg["grid_ratio"],
                                          jobs=cfg["jobs"])
        params = {"p": order, "weight_exponent": cfg["weight_exponent"], "dist": cfg["dist"]}
    else:  # log-weight
        token = cfg["model"] if cfg["model"] else "shifted:base=normal,rate=inv-n3"
        model = parse_model(token)
        diag = log_weight_tail_series(model, cfg["beta"], cfg["delta"],
                                      horizon=min(horizon, 200_000))
        params = {"beta": cfg["beta"], "delta": cfg["delta"], "model": token}

    stamp = report.run_stamp("estimate-series", cfg, cfg["seed"])
    payload = dict(stamp)
    payload["results"] = {"family": family, "params": params, "series": diag.to_payload()}
    slug = f"series_{family.replace('-', '_')}"
    if _want(cfg, "csv"):
        header, rows = report.series_rows(diag)
        report.emit_csv(_path(cfg, f"{slug}.csv"), header, rows, stamp=stamp)
    if _want(cfg, "json"):
        report.emit_json(_path(cfg, f"{slug}.json"), payload)
    if cfg["figures"]:
        report.render_series_figure(_path(cfg, f"{slug}.png"),
                                    f"{family} series", {family: diag}, stamp=stamp)
    print(f"estimate-series {family}: {diag.verdict.value} ({diag.evidence})")
    return 0


# -- extract-subseq -------------------------------------------------------------------


def _cmd_extract_subseq(cfg: dict) -> int:
    model = parse_model(cfg["model"])
    indices = extract_strong_subsequence(model, cfg["alpha"], cfg["k_max"],
                                         index_cap=cfg["index_cap"])
    stamp = report.run_stamp("extract-subseq", cfg, cfg["seed"])
    payload = dict(stamp)
    payload["results"] = {
        "model": model.token,
        "alpha": cfg["alpha"],
        "indices": [int(n) for n in indices],
    }
    if _want(cfg, "csv"):
        rows = []
        for k, n in enumerate(indices, start=1):
            bound = 1.0 / k**2
            probe = float(np.asarray(model.deviation_tail(np.asarray([n]),
                                                          bound ** (1.0 / cfg["alpha"])))[0])
            rows.append([k, int(n), probe, bound])
        report.emit_csv(_path(cfg, "subsequence.csv"),
                        ["k", "index", "tail_probability", "bound"], rows, stamp=stamp)
    if _want(cfg, "json"):
        report.emit_json(_path(cfg, "subsequence.json"), payload)
    if cfg["figures"]:
        report.render_indices_figure(_path(cfg, "subsequence.png"),
                                     f"extracted indices, {model.token}", indices, stamp=stamp)
    print(f"extract-subseq {model.token}: k_max={cfg['k_max']}, last index {int(indices[-1])}")
    return 0


_COMMANDS = {
    "verify-lln": _cmd_verify_lln,
    "counterexample": _cmd_counterexample,
    "relations": _cmd_relations,
    "estimate-series": _cmd_estimate_series,
    "extract-subseq": _cmd_extract_subseq,
}


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _resolve(args.command, args)
        if args.command == "counterexample":
            cfg["name"] = args.name
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ExtractionStalled as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, UnsupportedQuery) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
