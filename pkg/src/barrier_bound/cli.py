"""Command-line scenario runner.

Examples::

    barrier-bound --list
    barrier-bound run allen-cahn-kink-1d torus-stripe --out results
    barrier-bound run my.yaml --resolution-override 64,128 --sweep-only barrier.c_offset
    barrier-bound --merge results/a results/b --out merged.csv

Exit codes: 0 when every audit passes, 2 when any audit fails or is
inconclusive, 3 on construction errors (including ``c <= c_u``), 4 on
configuration or usage errors. ``BARRIER_BOUND_WORKERS`` caps the number of
scenarios run in parallel.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import scenario as sc
from . import serialize
from .errors import ConfigError

log = logging.getLogger("barrier_bound")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the configuration code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(sc.EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="barrier-bound", description="Run barrier and gradient-estimate audit scenarios.")
    parser.add_argument("--list", action="store_true", help="print built-in scenario names and exit")
    parser.add_argument("--merge", nargs="*", metavar="REPORT", default=None,
                        help="merge report bundles (directories or report.json files) into one CSV")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory for run, or CSV path for --merge (default stdout)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run scenarios from YAML files or built-in names")
    run.add_argument("configs", nargs="+", metavar="CONFIG")
    run.add_argument("--out", type=Path, default=Path("barrier_bound_results"), dest="run_out",
                     help="directory receiving one report bundle per scenario")
    run.add_argument("--resolution-override", type=_int_list, default=None, metavar="N[,N...]",
                     help="replace the field resolutions of every scenario")
    run.add_argument("--sweep-only", action="append", default=None, metavar="PARAM",
                     help="vary only this sweep key (repeatable); others use their first value")
    run.add_argument("--timestamp", default=None, help=argparse.SUPPRESS)
    return parser


def _workers(n_jobs: int) -> int:
    raw = os.environ.get("BARRIER_BOUND_WORKERS", "").strip()
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer BARRIER_BOUND_WORKERS=%r", raw)
    return max(1, min(cap, n_jobs))


def _run_one(job):
    cfg, out, override, sweep_only, stamp = job
    res = sc.run_scenario(cfg, out, resolution_override=override, sweep_only=sweep_only, timestamp=stamp)
    return res.name, res.exit_code, res.runtime, res.report.get("errors", [])


def cmd_run(args) -> int:
    try:
        configs = [sc.load_config(c) for c in args.configs]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return sc.EXIT_CONFIG
    jobs = [(cfg, args.run_out, args.resolution_override, args.sweep_only, args.timestamp) for cfg in configs]
    workers = _workers(len(jobs))
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_run_one, jobs))
        else:
            results = [_run_one(job) for job in jobs]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return sc.EXIT_CONFIG
    worst = sc.EXIT_OK
    for name, code, runtime, errors in results:
        status = {sc.EXIT_OK: "pass", sc.EXIT_FAIL: "FAIL", sc.EXIT_CONSTRUCTION: "ERROR"}[code]
        print(f"{name}: {status} ({runtime:.1f} s) -> {args.run_out / name}")
        for err in errors:
            where = ", ".join(f"{k}={v}" for k, v in sorted(err["sweep"].items()))
            print(f"  {err['type']}{' at ' + where if where else ''}: {err['message']}", file=sys.stderr)
        worst = max(worst, code)
    return worst


def cmd_merge(paths, out) -> int:
    if not paths:
        print("barrier-bound: error: --merge needs at least one report", file=sys.stderr)
        return sc.EXIT_CONFIG
    rows, skipped = sc.merge_reports(paths)
    if skipped == len(paths):
        print("barrier-bound: error: no readable reports", file=sys.stderr)
        return sc.EXIT_CONFIG
    if out is None:
        import csv

        w = csv.DictWriter(sys.stdout, fieldnames=serialize.SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        serialize.write_summary(out, rows)
        print(f"merged {len(rows)} rows from {len(paths) - skipped} reports -> {out}")
    return sc.EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list:
        for name in sc.builtin_names():
            print(name)
        return sc.EXIT_OK
    if args.merge is not None:
        return cmd_merge(args.merge, args.out)
    if args.command == "run":
        return cmd_run(args)
    parser.print_usage(sys.stderr)
    return sc.EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
