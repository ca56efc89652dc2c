"""Command-line experiment runner.

    pdmp-lab run <config-path> [--out DIR] [--workers N] [--seed-override S]
    pdmp-lab validate <config-path>

`run` exits 0 iff every report row passes; `validate` exits 0 for a
well-formed config and 2 otherwise, printing each violated constraint.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, override_seed, parse_config
from .runner import run_experiment


def _load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _row_line(row):
    verdict = "  ok  " if row.passed else (" FAIL " if row.passed is False else " info ")
    pieces = [f"[{verdict}] {row.name}"]
    if row.estimate is not None:
        pieces.append(f"estimate={row.estimate:.10g}")
    if row.standard_error is not None:
        pieces.append(f"se={row.standard_error:.3g}")
    if row.oracle is not None:
        pieces.append(f"oracle={row.oracle:.10g}")
    if row.bound is not None:
        pieces.append(f"bound={row.bound:.10g}")
    if row.tolerance is not None:
        pieces.append(f"tol={row.tolerance:.3g}")
    if row.note:
        pieces.append(f"({row.note})")
    return "  ".join(pieces)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pdmp-lab",
                                     description="PDMP experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config_path")
    run_p.add_argument("--out", default=".", help="output directory (default: .)")
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument("--seed-override", type=int, default=None)

    val_p = sub.add_parser("validate", help="check a config without running it")
    val_p.add_argument("config_path")

    args = parser.parse_args(argv)
    try:
        config = parse_config(_load(args.config_path))
    except FileNotFoundError:
        print(f"no such config: {args.config_path}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: kind={config.kind}, seed={config.seed}")
        return 0

    if args.seed_override is not None:
        config = override_seed(config, args.seed_override)
    report = run_experiment(config, out_dir=args.out, workers=args.workers)
    for row in report.rows:
        print(_row_line(row))
    for path in report.output_files:
        print(f"wrote {path}")
    status = "PASS" if report.all_passed else "FAIL"
    print(f"{status}: {config.kind} ({report.wall_clock_seconds:.2f}s)")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
