"""Command-line entry point: ``cfchannel {bounds,exact,figure1,simulate,sweep}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness
from .channel import bsc_spec, dmc_spec


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _formats(text: str) -> list[str]:
    return [f.strip() for f in text.split(",") if f.strip()]


def _emit(table, args) -> None:
    formats = _formats(args.format)
    if args.out:
        for path in harness.emit_outputs(table, formats, args.out):
            print(path)
    elif "csv" in formats:
        sys.stdout.write(harness.to_csv(table))


def cmd_bounds(args) -> None:
    if args.dmc:
        spec = dmc_spec(json.loads(args.dmc), args.epsilon)
        out = {"general": bounds.chernoff_c1(spec, args.m, args.n, args.delta)}
    else:
        rep = bounds.binary_report(args.p, args.epsilon, args.m, args.n,
                                   args.s_low, args.s_star)
        out = {"binary": rep, "threshold_side": rep.threshold_side}
        if args.general:
            out["general"] = bounds.chernoff_c1(bsc_spec(args.p, args.epsilon),
                                                args.m, args.n, args.delta)
    print(json.dumps(_jsonable(out), indent=2))


def cmd_exact(args) -> None:
    if args.row_sizes:
        rows = [int(s) for s in args.row_sizes.split(",")]
        cols = [int(s) for s in args.col_sizes.split(",")]
    else:
        if args.m % args.m0 or args.n % args.n0:
            raise ValueError("m0 and n0 must divide m and n")
        rows, cols = [args.m0] * (args.m // args.m0), [args.n0] * (args.n // args.n0)
    print(json.dumps({"exact_fill_error": bounds.exact_fill_error(rows, cols, args.p,
                                                                  args.epsilon)}))


def cmd_figure1(args) -> None:
    table = harness.figure1_curves(args.m, args.n, args.p, args.epsilon, args.d0,
                                   args.r1, args.r2, range(args.n0_min, args.n0_max + 1),
                                   optimize_r=args.optimize_r)
    _emit(table, args)


def cmd_simulate(args) -> None:
    cfg = harness.load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    if args.allow_large:
        cfg = dataclasses.replace(cfg, allow_large=True)
    if args.out is None and cfg.output_path:
        args.out = cfg.output_path
    _emit([harness.simulate_row(cfg, args.threads, args.optimize_r)], args)


def cmd_sweep(args) -> None:
    grid = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        grid["base"]["master_seed"] = args.seed
    _emit(harness.sweep(grid, args.threads), args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cfchannel", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def outputs(p, default_format="csv"):
        p.add_argument("--out", help="output path stem; files get .csv/.svg suffixes")
        p.add_argument("--format", default=default_format, help="comma list of csv,svg")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, help="override the master seed")

    p = sub.add_parser("bounds", help="p1, threshold and fill-error bounds")
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--epsilon", type=float, default=0.9)
    p.add_argument("--m", type=int, default=10**6)
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--s-low", type=int)
    p.add_argument("--s-star", type=int)
    p.add_argument("--dmc", help="JSON transition matrix for a general channel")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--general", action="store_true", help="also report Chernoff constants")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("exact", help="exact known-clustering block-error probability")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m0", type=int)
    p.add_argument("--n0", type=int)
    p.add_argument("--row-sizes", help="comma list, overrides m/m0")
    p.add_argument("--col-sizes", help="comma list, overrides n/n0")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("figure1", help="analytic curves over uniform cluster sizes")
    p.add_argument("--m", type=int, default=10**6)
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--epsilon", type=float, default=0.9)
    p.add_argument("--d0", type=float)
    p.add_argument("--r1", type=float, default=1.5)
    p.add_argument("--r2", type=float, default=0.5)
    p.add_argument("--n0-min", type=int, default=10)
    p.add_argument("--n0-max", type=int, default=150)
    p.add_argument("--optimize-r", action="store_true")
    outputs(p, "csv,svg")
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("simulate", help="Monte Carlo run of one config")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--optimize-r", action="store_true")
    outputs(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="bounds (and rates) over a parameter grid")
    p.add_argument("--config", required=True)
    outputs(p)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:
        print("error: " + json.dumps({"type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
