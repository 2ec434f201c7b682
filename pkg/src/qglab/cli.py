"""Command-line entry point ``qglab``.

    qglab <experiment> --n N [--d D | --p P | --r R] --trials T --seed S --out PATH
          [--workers W] [--tol KEY=VALUE ...] [--config FILE] [--timings]
    qglab summarize PATH [--csv]
    qglab explicit-tuple --n N --d D --out PATH [--seed S]

Exit codes: 0 success, 1 invalid configuration or I/O failure, 2 some
trials raised errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .exceptions import QGLabError
from .experiments import (
    DEFAULT_TOLERANCES,
    EXPERIMENTS,
    WORKERS_ENV,
    ExperimentConfig,
    SummaryError,
    explicit_tuple_report,
    format_summary,
    run_experiment,
    summarize,
    summary_csv,
)
from .operator_system import explicit_rigid_tuple
from .rng import seeded_rng

EXIT_OK, EXIT_CONFIG, EXIT_TRIALS = 0, 1, 2


def _tolerance(text):
    key, sep, value = text.partition("=")
    if not sep or key not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(
            f"expected KEY=VALUE with KEY in {', '.join(DEFAULT_TOLERANCES)}"
        )
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def _add_run_flags(p, out_required=True):
    p.add_argument("--n", type=int)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--d", type=int)
    group.add_argument("--p", type=float)
    group.add_argument("--r", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", dest="output_path")
    p.add_argument("--workers", type=int)
    p.add_argument("--tol", action="append", type=_tolerance, default=[], metavar="KEY=VALUE")
    p.add_argument("--config", help="JSON file with config fields; flags take precedence")
    p.add_argument("--timings", action="store_true", default=None,
                   help="add per-trial wall time (breaks byte-identical reruns)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qglab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        if name != "explicit-tuple":
            _add_run_flags(sub.add_parser(name, help=f"run the {name} sweep"))
    et = sub.add_parser("explicit-tuple", help="emit the explicit rigid system and its checks as JSON")
    _add_run_flags(et)
    sm = sub.add_parser("summarize", help="aggregate a JSONL records file")
    sm.add_argument("path")
    sm.add_argument("--csv", action="store_true", help="emit CSV instead of a table")
    return parser


def _config_from_args(args):
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise QGLabError("config file must hold a JSON object")
    data["experiment"] = args.command
    for key in ("n", "d", "p", "r", "trials", "seed", "output_path", "workers", "timings"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.d is not None or args.p is not None or args.r is not None:
        for key in ("d", "p", "r"):
            if getattr(args, key) is None:
                data.pop(key, None)
    if args.tol:
        data["tolerances"] = {**data.get("tolerances", {}), **dict(args.tol)}
    if "workers" not in data and os.environ.get(WORKERS_ENV):
        data["workers"] = int(os.environ[WORKERS_ENV])
    if "n" not in data:
        raise QGLabError("--n is required")
    return ExperimentConfig.from_dict(data)


def _explicit_tuple(cfg):
    V = explicit_rigid_tuple(cfg.n, cfg.d, seeded_rng(cfg.seed, 0), cfg.tol("gap_tol"))
    doc = {
        "n": cfg.n,
        "d": cfg.d,
        "seed": cfg.seed,
        "system": V.to_dict(),
        "report": explicit_tuple_report(V, cfg.tol("tol_solve"), cfg.tol("gap_tol")),
    }
    text = json.dumps(doc, sort_keys=True, indent=1)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(json.dumps(doc["report"], sort_keys=True, indent=1))
    return EXIT_OK if doc["report"]["certified_trivial"] else EXIT_TRIALS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "summarize":
        try:
            summary = summarize(args.path)
        except (OSError, SummaryError) as exc:
            print(f"qglab: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(summary_csv(summary) if args.csv else format_summary(summary), end="\n" if not args.csv else "")
        return EXIT_OK
    try:
        cfg = _config_from_args(args)
    except (OSError, ValueError, TypeError, QGLabError) as exc:
        print(f"qglab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if cfg.experiment == "explicit-tuple":
            return _explicit_tuple(cfg)
        summary, _ = run_experiment(cfg)
    except OSError as exc:
        print(f"qglab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_summary(summary))
    return EXIT_TRIALS if summary["errors"] else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
