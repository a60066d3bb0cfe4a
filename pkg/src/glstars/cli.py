"""Command-line entry points.

Subcommands: generate, select, benchmark, concentration. Flags mirror
the ExperimentConfig fields; --config points at a JSON file whose keys
are the same fields, with explicit flags taking precedence.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (ConfigError, GlstarsError, InvalidBlockSize,
                     InvalidGroupSize, InvalidRho)
from . import harness

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file of ExperimentConfig fields")
    parser.add_argument("--kind", choices=("hub", "neighborhood"))
    parser.add_argument("--p", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--rho", type=float)
    parser.add_argument("--s", type=int, help="hub group size")
    parser.add_argument("--methods", type=str,
                        help="comma-separated subset of "
                             + ",".join(harness.KNOWN_METHODS))
    parser.add_argument("--grid-size", type=int, dest="grid_size")
    parser.add_argument("--grid-ratio", type=float, dest="grid_ratio")
    parser.add_argument("--num-subsamples", type=int, dest="num_subsamples")
    parser.add_argument("--b-override", type=int, dest="b_override")
    parser.add_argument("--beta", type=float)
    parser.add_argument("--folds", type=int)
    parser.add_argument("--repetitions", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--penalize-diagonal", dest="penalize_diagonal",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--refit-on-full", dest="refit_on_full",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--n-jobs", type=int, dest="n_jobs")


def _config_from_args(args: argparse.Namespace) -> harness.ExperimentConfig:
    raw: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
    for name in harness.ExperimentConfig.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    if isinstance(raw.get("methods"), str):
        raw["methods"] = tuple(m for m in raw["methods"].split(",") if m)
    return harness.ExperimentConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glstars",
        description="Sparse Gaussian graphical model estimation with "
                    "stability-based regularization selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    _add_config_flags(gen)
    gen.add_argument("--out", type=Path, required=True)

    sel = sub.add_parser("select", help="run one selection method on a CSV")
    _add_config_flags(sel)
    sel.add_argument("--data", type=Path, required=True,
                     help="CSV matrix with a header row")
    sel.add_argument("--method", required=True,
                     choices=tuple(m for m in harness.KNOWN_METHODS
                                   if m != "oracle"))
    sel.add_argument("--out", type=Path, required=True)
    sel.add_argument("--dot", action="store_true",
                     help="also write a DOT-format graph dump")

    ben = sub.add_parser("benchmark", help="multi-method synthetic benchmark")
    _add_config_flags(ben)
    ben.add_argument("--out", type=Path, required=True)
    ben.add_argument("--quiet", action="store_true")

    con = sub.add_parser("concentration",
                         help="instability concentration report")
    con.add_argument("--out", type=Path, required=True)
    con.add_argument("--p", type=int, default=8)
    con.add_argument("--kind", choices=("hub", "neighborhood"),
                     default="neighborhood")
    con.add_argument("--n-values", type=str, default="100,400,1600")
    con.add_argument("--trials", type=int, default=200)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--delta", type=float, default=0.05)
    con.add_argument("--num-subsamples", type=int, default=50)
    con.add_argument("--grid-size", type=int, default=10)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate":
        config = _config_from_args(args)
        manifest = harness.cmd_generate(config, args.out)
        print(json.dumps(manifest, sort_keys=True))
    elif args.command == "select":
        config = _config_from_args(args)
        payload = harness.cmd_select(args.data, args.method, config,
                                     args.out, dot=args.dot)
        print(json.dumps({k: payload[k] for k in
                          ("method", "chosen_capital_lambda", "chosen_lambda")},
                         sort_keys=True))
    elif args.command == "benchmark":
        config = _config_from_args(args)
        progress = None
        if not args.quiet:
            def progress(rep):
                print(f"repetition {rep + 1}/{config.repetitions} done",
                      file=sys.stderr, flush=True)
        report = harness.cmd_benchmark(config, args.out, progress=progress)
        summary = {m: {k: round(stats[k]["mean"], 4)
                       for k in ("precision", "recall", "f1")}
                   for m, stats in report.aggregates.items()}
        print(json.dumps(summary, sort_keys=True))
    elif args.command == "concentration":
        try:
            n_values = tuple(int(v) for v in args.n_values.split(","))
        except ValueError as exc:
            raise ConfigError(f"--n-values: {exc}") from exc
        report = harness.cmd_concentration(
            args.out, p=args.p, kind=args.kind, n_values=n_values,
            trials=args.trials, seed=args.seed, delta=args.delta,
            num_subsamples=args.num_subsamples, grid_size=args.grid_size)
        print(json.dumps({"cells": len(report.cells)}))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except (ConfigError, InvalidBlockSize, InvalidGroupSize,
            InvalidRho) as exc:
        # bad user-supplied parameters, wherever they surface
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GlstarsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
