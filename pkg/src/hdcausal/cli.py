"""Batch command line interface.

Subcommands: screen, fit, ate, simulate, bootstrap. Every run writes its
outputs (CSV/JSON, and figures unless --no-figures) plus a manifest.json
into --out. Exit codes: 0 success, 1 data error, 2 when no tuning
candidate converges.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import bootstrap_ate, trimmed_summary
from .data import (
    ColumnRoles,
    correlation_filter,
    drop_constant_features,
    load_csv,
    standardize,
)
from .errors import ConvergenceError, DataError
from .estimators import positivity_report, weighted_sample
from .parallel import effective_workers
from .screening import screening_size, sis_screen
from .selection import METHODS, TuningGrid, select_by_wamd
from .simulate import make_scenario, run_replications
from .solvers import fit_outcome
from . import figures


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _roles(args) -> ColumnRoles:
    features = tuple(args.features.split(",")) if args.features else None
    return ColumnRoles(
        treatment=args.treatment,
        outcome=args.outcome,
        features=features,
        outcome_kind=args.outcome_kind,
    )


def _load_screen_filter(args):
    """load -> drop constants -> standardize -> screen -> correlation filter."""
    ds = load_csv(args.input, _roles(args))
    ds, const_meta = drop_constant_features(ds)
    ds = standardize(ds)
    q = args.q if args.q else min(screening_size(ds.n), ds.p)
    if q > ds.p:
        raise DataError(f"q={q} exceeds the {ds.p} usable features")
    screen = sis_screen(ds, q)
    kept = ds.select_features(screen.selected)
    filtered, corr_meta = correlation_filter(kept, args.cutoff)

    status = {m.name: "constant" for m in const_meta if not m.kept}
    screened_names = set(kept.feature_names)
    for m in const_meta:
        if m.kept:
            status[m.name] = (
                "screened_out" if m.name not in screened_names else "kept"
            )
    for m in corr_meta:
        if not m.kept:
            status[m.name] = "redundant_correlation"
    audit = [(m.name, status[m.name]) for m in const_meta]
    return filtered, screen, audit


def cmd_screen(args, out: Path) -> None:
    ds = load_csv(args.input, _roles(args))
    q = args.q if args.q else min(screening_size(ds.n), ds.p)
    if q > ds.p:
        raise DataError(f"q={q} exceeds the {ds.p} features")
    screen = sis_screen(ds, q)
    _write_csv(
        out / "scores.csv",
        ["feature_name", "score"],
        [
            (ds.feature_names[j], repr(float(screen.scores[j])))
            for j in range(ds.p)
        ],
    )
    with open(out / "selected.txt", "w", encoding="utf-8") as fh:
        for j in screen.selected:
            fh.write(ds.feature_names[j] + "\n")
    if args.figures:
        figures.screening_figure(screen.scores, q, out / "screening.png")


def cmd_fit(args, out: Path) -> dict:
    ds, screen, audit = _load_screen_filter(args)
    _write_csv(out / "features.csv", ["feature_name", "status"], audit)
    outcome_fit = fit_outcome(ds)
    chosen, records = select_by_wamd(
        ds.X, ds.A, outcome_fit, TuningGrid(), args.method,
        fit_intercept=args.intercept, clip=args.clip,
    )
    _write_csv(
        out / "tuning.csv",
        ["method", "lambda1", "lambda2", "gamma", "wamd", "n_selected", "converged"],
        [
            (
                r.method,
                repr(r.lambda1),
                repr(r.lambda2),
                repr(r.gamma),
                repr(r.wamd),
                r.n_selected,
                int(r.converged),
            )
            for r in records
        ],
    )
    _write_json(
        out / "coefficients.json",
        {
            "method": chosen.method,
            "lambda1": chosen.lambda1,
            "lambda2": chosen.lambda2,
            "gamma": chosen.gamma,
            "wamd": chosen.wamd,
            "intercept": chosen.intercept,
            "coefficients": {
                name: float(a)
                for name, a in zip(ds.feature_names, chosen.alpha)
            },
            "selected": [
                name
                for name, keep in zip(ds.feature_names, chosen.selected_mask)
                if keep
            ],
        },
    )
    if args.figures:
        figures.tuning_figure(records, out / "tuning.png")
    return {"ds": ds, "chosen": chosen, "outcome_fit": outcome_fit}


def cmd_ate(args, out: Path) -> None:
    fitted = cmd_fit(args, out)
    ds, chosen = fitted["ds"], fitted["chosen"]
    sample = weighted_sample(
        ds.X, ds.A, ds.Y, chosen.alpha, chosen.intercept,
        fitted["outcome_fit"].beta, args.clip,
    )
    _write_json(
        out / "estimate.json",
        {
            "ate": sample.ate,
            "wamd": sample.wamd,
            "n_selected": chosen.n_selected,
            "method": chosen.method,
            "lambda1": chosen.lambda1,
            "lambda2": chosen.lambda2,
            "gamma": chosen.gamma,
            "positivity": positivity_report(sample.pi, ds.A, args.clip).to_dict(),
        },
    )
    if args.figures:
        figures.overlap_figure(sample.pi, ds.A, out / "overlap.png")


def cmd_simulate(args, out: Path) -> None:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    config = make_scenario(args.scenario, args.n, args.p, args.rho, args.seed)
    workers = effective_workers(args.workers)
    metrics, results = run_replications(
        config, methods, args.reps, workers=workers,
        fit_intercept=args.intercept,
    )
    rows = []
    for r in results:
        for method in methods:
            if method in r.outcomes:
                o = r.outcomes[method]
                rows.append((r.rep_index, method, repr(o.ate), o.n_selected))
    _write_csv(out / "replications.csv", ["seed", "method", "ate", "n_selected"], rows)
    _write_json(
        out / "metrics.json",
        {
            "scenario": args.scenario,
            "n": args.n,
            "p": args.p,
            "rho": args.rho,
            "reps": args.reps,
            "seed": args.seed,
            "truth": config.beta_A,
            "methods": {
                m: {
                    "bias": metrics[m].bias,
                    "se": metrics[m].se,
                    "mse": metrics[m].mse,
                    "n_reps": metrics[m].n_reps,
                    "n_excluded": metrics[m].n_excluded,
                    "inclusion": [float(v) for v in metrics[m].inclusion],
                }
                for m in methods
            },
        },
    )
    if args.figures:
        figures.metrics_figure(metrics, out / "metrics.png")
        figures.inclusion_figure(
            {m: metrics[m].inclusion for m in methods}, out / "inclusion.png"
        )


def cmd_bootstrap(args, out: Path) -> None:
    ds, screen, audit = _load_screen_filter(args)
    _write_csv(out / "features.csv", ["feature_name", "status"], audit)
    workers = effective_workers(args.workers)
    result = bootstrap_ate(
        ds, args.method, args.B, args.seed,
        fit_intercept=args.intercept, clip=args.clip, workers=workers,
    )
    payload = {
        "method": args.method,
        "ate": result.point,
        "mean": result.boot_mean,
        "bias": result.bias,
        "se": result.se,
        "mse": result.mse,
        "ci_lower": result.ci[0],
        "ci_upper": result.ci[1],
        "ci_length": result.ci_length,
        "B": result.B,
        "excluded": result.excluded,
    }
    if args.trim:
        lo, hi = (float(v) for v in args.trim.split(","))
        summary = trimmed_summary(result.resample_ates, lo, hi)
        payload["trimmed"] = {
            "lower_pct": lo,
            "upper_pct": hi,
            "n_retained": summary.n_retained,
            "mean": summary.mean,
            "sd": summary.sd,
        }
    _write_json(out / "table1.json", payload)
    _write_csv(
        out / "inclusion.csv",
        ["feature_name", "inclusion"],
        [
            (name, repr(float(freq)))
            for name, freq in zip(ds.feature_names, result.inclusion_freq)
        ],
    )
    if args.figures:
        figures.bootstrap_figure(
            result.resample_ates, result.point, result.ci, out / "bootstrap.png"
        )
        figures.inclusion_figure(
            {args.method: result.inclusion_freq}, out / "inclusion.png"
        )


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--treatment", default="A", help="treatment column (0/1)")
    p.add_argument("--outcome", default="Y", help="outcome column")
    p.add_argument("--features", default=None,
                   help="comma-separated feature columns (default: all others)")
    p.add_argument("--outcome-kind", choices=["continuous", "binary"], default=None,
                   help="override the binary/continuous inference")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=list(METHODS), default="goal")
    p.add_argument("--q", type=int, default=None,
                   help="features kept by screening (default: floor(n/ln n))")
    p.add_argument("--cutoff", type=float, default=0.95,
                   help="absolute-correlation cutoff for redundancy removal")
    p.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True,
                   help="include an unpenalized intercept in the propensity model")
    p.add_argument("--clip", type=float, default=1e-6,
                   help="probability clipping level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdcausal",
        description="Confounder selection and IPTW effect estimation for "
                    "ultra-high-dimensional tabular data",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                       default=True, help="render PNG figures")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $HDCAUSAL_WORKERS or all cores)")

    p = sub.add_parser("screen", help="rank features by conditional ball covariance")
    _add_data_flags(p)
    p.add_argument("--q", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("fit", help="tune and fit the propensity model")
    _add_data_flags(p)
    _add_model_flags(p)
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ate", help="fit and estimate the treatment effect")
    _add_data_flags(p)
    _add_model_flags(p)
    common(p)
    p.set_defaults(func=cmd_ate)

    p = sub.add_parser("simulate", help="run the synthetic benchmark")
    p.add_argument("--scenario", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="oal,goal")
    p.add_argument("--intercept", action=argparse.BooleanOptionalAction, default=True)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bootstrap", help="bootstrap the full pipeline")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--B", type=int, default=1000, help="number of resamples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trim", default=None,
                   help="also report a trimmed summary, e.g. --trim 10,90")
    common(p)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    try:
        args.func(args, out)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    config = {
        k: v for k, v in vars(args).items() if k not in ("func", "out") and v is not ...
    }
    _write_json(
        out / "manifest.json",
        {
            "command": args.command,
            "config": config,
            "seed": getattr(args, "seed", None),
            "versions": {
                "hdcausal": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "workers": effective_workers(getattr(args, "workers", None)),
            "timings": {"wall_s": time.perf_counter() - started},
        },
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
