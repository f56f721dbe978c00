"""Command line entry point: run, validate and list-presets subcommands."""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config, validate
from .errors import TvMarkovError
from .presets import preset_summary
from .runner import run

THREADS_ENV = "TVMARKOV_THREADS"


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvmarkov",
        description="Experiments on Markov chains with slowly varying kernels: "
                    "approximation bounds, mixing decay and local estimators.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the experiment named in a config")
    run_p.add_argument("--config", required=True, help="path to a YAML scenario")
    run_p.add_argument("--seed", type=int, default=None, help="override config seed")
    run_p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default ${THREADS_ENV} or 1)")
    run_p.add_argument("--out", default=None, help="override output directory")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip rendering PNG figures next to the CSV data")

    val_p = sub.add_parser("validate", help="check a config without running it")
    val_p.add_argument("--config", required=True)

    sub.add_parser("list-presets", help="print the available model presets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name, blurb in preset_summary().items():
                print(f"{name}: {blurb}")
            return 0
        if args.command == "validate":
            cfg = load_config(args.config, strict=False)
            problems = validate(cfg)
            for p in problems:
                print(p)
            print("ok" if not problems else f"{len(problems)} problem(s)")
            return 0 if not problems else 1
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.output_dir = args.out
        if args.no_figures:
            cfg.figures = False
        threads = args.threads if args.threads is not None else _default_threads()
        report = run(cfg, threads=threads)
        for record in report.records:
            status = "PASS" if record["passed"] else "FAIL"
            print(f"{status} {record['check_id']}: statistic="
                  f"{record['statistic']:.6g} threshold={record['threshold']:.6g}")
        return 0 if report.all_passed else 1
    except TvMarkovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
