"""Command line entry point: ``gluedtrees run|validate|bounds``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys

from .bounds import CSV_COLUMNS, bounds_table
from .config import check, load_config, validate
from .errors import BoundDomainError, ConfigError, ResourceBudgetError
from .experiments import EXIT_CONFIG, EXIT_OK, EXIT_RESOURCE, run


def _load(path):
    try:
        return load_config(path)
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None


def cmd_run(args) -> int:
    try:
        doc, lines = _load(args.config)
        if args.seed is not None and isinstance(doc, dict):
            doc["master_seed"] = args.seed
        cfg = check(doc, lines)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}: {d}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status, files = run(cfg, args.out, args.threads)
    except ResourceBudgetError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    for f in files:
        print(f)
    return status


def cmd_validate(args) -> int:
    try:
        doc, lines = _load(args.config)
    except ConfigError as exc:
        diags = exc.diagnostics
    else:
        diags = validate(doc, lines)
    for d in diags:
        print(f"{args.config}: {d}")
    return EXIT_CONFIG if diags else EXIT_OK


def cmd_bounds(args) -> int:
    try:
        reports = bounds_table(range(args.n_min, args.n_max + 1, args.step), args.t)
    except BoundDomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gluedtrees", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--out", help="report directory (overrides output.dir)")
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bounds", help="print the bounds table as CSV")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--t", type=int, help="fixed t (default floor(2**(n/3)))")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
