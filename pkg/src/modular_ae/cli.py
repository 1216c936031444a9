"""Command-line surface: synth, train, bench, sweep, diagnose.

Every command is deterministic given ``--seed``: all randomness flows from
that one root seed, split per purpose via ``rng.derive_seed(seed, tag)``.
Timing values are segregated into a separate ``timing`` object inside the
JSON reports so determinism checks can exclude them.

Exit codes: 0 success, 2 usage error, 3 data/validation error,
4 numerical failure. ``MAE_LOG`` in {error, info, debug} controls logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .backfit import fit_backfit
from .core import TrainConfig, lambda_upper_bound, save_model
from .data import (
    MixtureSpec,
    apply_offsets,
    center_features,
    gaussian_mixture,
    load_csv,
    save_csv,
    train_test_split,
)
from .dcor import dcor_report
from .errors import NumericalError, ValidationError
from .evaluate import evaluate_bae, evaluate_sweep
from .gradient import benchmark_solvers, fit_gd
from .rng import derive_seed

log = logging.getLogger("modular_ae")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _configure_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("MAE_LOG", "info").lower(), logging.INFO
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def parse_lambda_grid(text: str) -> list[float]:
    """Parse ``start:stop:step`` (stop inclusive) or an explicit comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad lambda grid {text!r}: {exc}") from exc


def _write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _write_json(path, payload: dict) -> None:
    _write_text(path, json.dumps(payload, indent=1, allow_nan=False) + "\n")


def _csv_lines(header: str, rows) -> str:
    return "\n".join([header] + [",".join(str(c) for c in row) for row in rows]) + "\n"


def _default_report(out_path: str, name: str) -> str:
    return str(Path(out_path).parent / name)


def _add_mixture_args(p: argparse.ArgumentParser, n_default: int) -> None:
    p.add_argument("--clusters", type=int, default=5, help="number of mixture components")
    p.add_argument("--dim", type=int, default=20, help="feature dimension")
    p.add_argument("--n", type=int, default=n_default, help="number of points")
    p.add_argument("--std", type=float, default=0.25, help="within-cluster standard deviation")
    p.add_argument("--mean-scale", type=float, default=1.0, help="std of the cluster-mean draw")


def _add_train_args(p: argparse.ArgumentParser, modules: int, hidden: int, lam: float) -> None:
    p.add_argument("--modules", type=int, default=modules, help="ensemble size M")
    p.add_argument("--hidden", type=int, default=hidden, help="hidden width P per module")
    p.add_argument("--lambda", dest="lam", type=float, default=lam, help="diversity weight")
    p.add_argument("--epochs", type=int, default=200, help="maximum training epochs")
    p.add_argument("--tol", type=float, default=1e-5, help="per-epoch decrease stopping threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modular-ae",
        description="Train and evaluate linear modular autoencoder ensembles.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled Gaussian-mixture CSV")
    _add_mixture_args(p, n_default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit one ensemble and write model + report JSON")
    p.add_argument("--data", required=True, help="input CSV (examples as rows)")
    p.add_argument("--unlabeled", action="store_true", help="CSV has no trailing label column")
    _add_train_args(p, modules=10, hidden=10, lam=0.5)
    p.add_argument("--solver", choices=("backfit", "gd"), default="backfit")
    p.add_argument("--lr", type=float, default=None, help="gradient-descent learning rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--report", default=None, help="report JSON path (default: report.json beside --out)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", help="time the backfitting solver against gradient descent")
    _add_mixture_args(p, n_default=1000)
    _add_train_args(p, modules=10, hidden=10, lam=0.5)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.csv", help="timing table CSV path")
    p.add_argument("--report", default=None, help="report JSON path (default: bench.json beside --out)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="cross-validated classification error across a lambda grid")
    p.add_argument("--data", required=True, help="labeled input CSV")
    p.add_argument("--lambdas", required=True, help="grid: start:stop:step or comma list")
    _add_train_args(p, modules=10, hidden=10, lam=0.0)
    p.add_argument("--classifier", choices=("knn1", "softmax"), default="knn1")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--no-bae", action="store_true", help="skip the bagging baseline")
    p.add_argument("--jobs", type=int, default=1, help="parallel fold/grid evaluations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="sweep.csv", help="sweep CSV path")
    p.add_argument("--bae-out", default=None, help="baseline CSV path (default: bae.csv beside --out)")
    p.add_argument("--report", default=None, help="report JSON path (default: sweep.json beside --out)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="distance-correlation fidelity/diversity across a lambda grid")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--unlabeled", action="store_true", help="CSV has no trailing label column")
    p.add_argument("--lambdas", required=True, help="grid: start:stop:step or comma list")
    _add_train_args(p, modules=10, hidden=10, lam=0.0)
    p.add_argument("--subsample", type=int, default=1000, help="columns used for distance matrices")
    p.add_argument("--eval-on", choices=("test", "train", "pooled"), default="test")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--jobs", type=int, default=1, help="parallel per-lambda fits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="dcor.csv", help="diagnostics CSV path")
    p.add_argument("--report", default=None, help="report JSON path (default: dcor.json beside --out)")
    p.set_defaults(func=cmd_diagnose)

    return parser


def _load(args, labeled_default: bool = True):
    has_labels = labeled_default and not getattr(args, "unlabeled", False)
    data = load_csv(args.data, has_labels=has_labels)
    log.info("loaded %s: D=%d N=%d", args.data, data.dim, data.num_examples)
    return data


def _mixture_spec(args, seed: int) -> MixtureSpec:
    return MixtureSpec(
        num_clusters=args.clusters,
        dim=args.dim,
        num_points=args.n,
        cluster_std=args.std,
        mean_scale=args.mean_scale,
        seed=seed,
    )


def cmd_synth(args) -> int:
    data = gaussian_mixture(_mixture_spec(args, args.seed))
    save_csv(data, args.out)
    print(f"synth: wrote {args.out} (D={data.dim}, N={data.num_examples}, K={args.clusters})")
    return EXIT_OK


def _train_config(args, seed: int | None = None, lam: float | None = None) -> TrainConfig:
    return TrainConfig(
        lam=args.lam if lam is None else lam,
        num_modules=args.modules,
        hidden_dim=args.hidden,
        max_epochs=args.epochs,
        tolerance=args.tol,
        seed=args.seed if seed is None else seed,
        learning_rate=getattr(args, "lr", None),
    )


def cmd_train(args) -> int:
    data = center_features(_load(args))
    config = _train_config(args)
    solver = fit_backfit if args.solver == "backfit" else fit_gd
    model, report = solver(data, config)
    save_model(model, args.out)
    payload = {
        "command": "train",
        "solver": args.solver,
        "data": args.data,
        "lambda": config.lam,
        "modules": config.num_modules,
        "hidden": config.hidden_dim,
        "seed": config.seed,
        "epochs_run": report.epochs_run,
        "converged": report.converged,
        "final_error": report.final_error,
        "error_trace": list(report.error_trace),
        "timing": {"wall_time_seconds": report.wall_time_seconds},
    }
    report_path = args.report or _default_report(args.out, "report.json")
    _write_json(report_path, payload)
    print(
        f"train[{args.solver}]: lambda={config.lam:g} epochs={report.epochs_run} "
        f"converged={report.converged} final_error={report.final_error:.6g} -> {args.out}"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = _mixture_spec(args, derive_seed(args.seed, "bench-spec"))
    config = _train_config(args, seed=derive_seed(args.seed, "bench-config"))
    bench = benchmark_solvers(spec, config, args.repeats)
    stats = bench.stats()
    rows = [
        (stat, repr(stats["backfit_s"][stat]), repr(stats["gd_s"][stat]), repr(stats["speedup"][stat]))
        for stat in ("min", "mean", "max")
    ]
    _write_text(args.out, _csv_lines("stat,backfit_s,gd_s,speedup", rows))
    payload = {
        "command": "bench",
        "repeats": bench.repeats,
        "costs": {"backfit": list(bench.backfit_costs), "gd": list(bench.gd_costs)},
        "timing": {
            "backfit_s": list(bench.backfit_seconds),
            "gd_s": list(bench.gd_seconds),
            "speedup": list(bench.speedups),
            "stats": stats,
        },
    }
    _write_json(args.report or _default_report(args.out, "bench.json"), payload)
    print("stat,backfit_s,gd_s,speedup")
    for stat in ("min", "mean", "max"):
        print(
            f"{stat},{stats['backfit_s'][stat]:.4g},{stats['gd_s'][stat]:.4g},"
            f"{stats['speedup'][stat]:.1f}x"
        )
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = _load(args)
    grid = parse_lambda_grid(args.lambdas)
    config = _train_config(args, lam=0.0)
    report = evaluate_sweep(
        data, grid, config, folds=args.folds, classifier=args.classifier, jobs=args.jobs
    )
    baseline = None
    if not args.no_bae:
        baseline = evaluate_bae(
            data, config, folds=args.folds, classifier=args.classifier, jobs=args.jobs
        )

    rows = [
        (repr(c.lam), c.fold, repr(c.ensemble_error), repr(c.individual_error))
        for c in report.cells
    ]
    _write_text(args.out, _csv_lines("lambda,fold,ensemble_error,individual_error", rows))
    bae_path = args.bae_out or _default_report(args.out, "bae.csv")
    if baseline is not None:
        _write_text(
            bae_path,
            _csv_lines(
                "fold,baseline_error",
                [(f, repr(e)) for f, e in enumerate(baseline.fold_errors)],
            ),
        )
    payload = {
        "command": "sweep",
        "classifier": args.classifier,
        "folds": args.folds,
        "lambda_grid": list(report.lambda_grid),
        "ensemble_mean": list(report.ensemble_mean),
        "ensemble_std": list(report.ensemble_std),
        "individual_mean": list(report.individual_mean),
        "individual_std": list(report.individual_std),
        "baseline": None
        if baseline is None
        else {"mean": baseline.mean, "std": baseline.std, "folds": list(baseline.fold_errors)},
        "timing": {},
    }
    _write_json(args.report or _default_report(args.out, "sweep.json"), payload)
    for lam, ens, ind in zip(report.lambda_grid, report.ensemble_mean, report.individual_mean):
        print(f"sweep: lambda={lam:g} ensemble={ens:.4f} individual={ind:.4f}")
    if baseline is not None:
        print(f"sweep: baseline={baseline.mean:.4f} +- {baseline.std:.4f}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    data = _load(args)
    grid = parse_lambda_grid(args.lambdas)
    for lam in grid:
        if not (0 <= lam < lambda_upper_bound(args.modules)):
            raise ValidationError(
                f"lambda={lam} outside [0, M/(M-1)) for M={args.modules}"
            )
    train_part, test_part = train_test_split(
        data, args.test_fraction, seed=derive_seed(args.seed, "split")
    )
    train_centered = center_features(train_part)
    if args.eval_on == "train":
        eval_part = train_centered
    elif args.eval_on == "test":
        eval_part = apply_offsets(test_part, train_centered.feature_means)
    else:
        eval_part = apply_offsets(data, train_centered.feature_means)

    def fit_one(k_lam):
        k, lam = k_lam
        cfg = _train_config(args, seed=derive_seed(args.seed, f"diag-fit-l{k}"), lam=lam)
        model, _ = fit_backfit(train_centered, cfg)
        return model

    pairs = list(enumerate(grid))
    if args.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            models = list(pool.map(fit_one, pairs))
    else:
        models = [fit_one(p) for p in pairs]

    report = dcor_report(
        models, eval_part, subsample=args.subsample, seed=derive_seed(args.seed, "subsample")
    )
    rows = [
        (repr(lam), repr(f), repr(p))
        for lam, f, p in zip(report.lambdas, report.avg_fidelity, report.avg_pairwise)
    ]
    _write_text(args.out, _csv_lines("lambda,avg_fidelity,avg_pairwise", rows))
    payload = {
        "command": "diagnose",
        "eval_on": args.eval_on,
        "subsample": report.subsample_size,
        "lambdas": list(report.lambdas),
        "avg_fidelity": list(report.avg_fidelity),
        "avg_pairwise": list(report.avg_pairwise),
        "timing": {},
    }
    _write_json(args.report or _default_report(args.out, "dcor.json"), payload)
    for lam, f, p in zip(report.lambdas, report.avg_fidelity, report.avg_pairwise):
        print(f"diagnose: lambda={lam:g} fidelity={f:.4f} pairwise={p:.4f}")
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        code = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.debug("command finished in %.3fs", time.perf_counter() - started)
    return code


if __name__ == "__main__":
    sys.exit(main())
