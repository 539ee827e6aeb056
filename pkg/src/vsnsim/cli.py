"""Command line entry point: ``run``, ``sweep`` and ``probe-saturation-flow``."""

from __future__ import annotations

import argparse
import csv
import sys

from .experiment import (
    CSV_COLUMNS,
    ConfigError,
    SweepError,
    load_config,
    probe_rows,
    records_to_csv,
    run_scenario,
    run_sweep,
)
from .topology import TopologyError


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vsnsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and print its CSV row")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--trace", default=None, help="write the message trace as JSON lines")

    sweep = sub.add_parser("sweep", help="run every policy x saturation x seed cell")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=1)

    probe = sub.add_parser("probe-saturation-flow", help="discharge rate under permanent green")
    probe.add_argument("--out", required=True)
    probe.add_argument("--duration", type=int, default=3600)
    probe.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    probe.add_argument("--p", type=float, nargs="+", default=[0.15])
    probe.add_argument("--v-max", type=int, default=2)
    return ap


def _run(args) -> int:
    config = load_config(args.config)
    rec = run_scenario(config, seed=args.seed, trace=args.trace)
    sys.stdout.write(records_to_csv([rec]))
    return 0


def _sweep(args) -> int:
    config = load_config(args.config)
    try:
        records = run_sweep(config, out=args.out, workers=args.workers)
    except SweepError as exc:
        for cell, err in exc.failures:
            pol, sat, seed = cell
            print(f"error: {pol.label} saturation={sat} seed={seed}: {err}", file=sys.stderr)
        print(f"error: {exc}; {len(exc.records)} row(s) written to {args.out}", file=sys.stderr)
        return 1
    print(f"{len(records)} row(s) written to {args.out}")
    return 0


def _probe(args) -> int:
    rows = probe_rows(seeds=tuple(args.seeds), duration=args.duration, v_max=args.v_max,
                      ps=tuple(args.p))
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    for row in rows:
        print(f"p={row['p']:g} seed={row['seed']}: {row['veh_per_hour_green']:.1f} veh/h")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _run, "sweep": _sweep, "probe-saturation-flow": _probe}[args.command]
    try:
        return handler(args)
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


__all__ = ["main", "CSV_COLUMNS"]
