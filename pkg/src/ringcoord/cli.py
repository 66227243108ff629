"""Command-line front end.

Subcommands::

    ringcoord simulate --nodes 300 --model freespace --replicates 5 --out runs/
    ringcoord campaign --plan plan.cfg [overrides...]
    ringcoord plot --in runs/
    ringcoord table build --rings 1:5 --range 10 --delta 0.1 --out tables/
    ringcoord table inspect tables/*.csv

Plan/config files are flat ``key = value`` lines whose keys are the long flag
names (``nodes``, ``replicates``, ``model``, ``mode``, ``slots``, ``width``,
``height``, ``sink-x``, ``sink-y``, ``range``, ``eta``, ``sigma``, ``delta``,
``precision``, ``seed``, ``out``). ``nodes`` accepts ``50,150`` or an inclusive
range ``50:750:100``; ``model`` accepts a comma list. Flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiment import ExperimentPlan, emit_plots, parse_config, parse_counts, run_campaign
from .geometry import OffsetTable, RingModelParams, build_offset_table, check_table

PLAN_KEYS = {
    "nodes": ("nodes", parse_counts),
    "replicates": ("replicates", int),
    "model": ("models", lambda s: [m.strip() for m in s.split(",") if m.strip()]),
    "mode": ("mode", str),
    "slots": ("slots", int),
    "width": ("width", float),
    "height": ("height", float),
    "sink-x": ("sink_x", float),
    "sink-y": ("sink_y", float),
    "range": ("radio_range", float),
    "eta": ("eta", float),
    "sigma": ("sigma", float),
    "delta": ("delta", float),
    "precision": ("precision", int),
    "seed": ("seed", int),
    "out": ("out", str),
}


def _add_plan_flags(p: argparse.ArgumentParser) -> None:
    # defaults stay None so that only explicitly given flags override the file
    p.add_argument("--nodes", help="node count(s): N, N1,N2 or START:STOP:STEP")
    p.add_argument("--width", help="field width (default 50)")
    p.add_argument("--height", help="field height (default 50)")
    p.add_argument("--sink-x", help="sink x (default 25)")
    p.add_argument("--sink-y", help="sink y (default 25)")
    p.add_argument("--range", help="radio range R (default 10)")
    p.add_argument("--model", help="freespace, shadowing, or both comma-separated")
    p.add_argument("--eta", help="path-loss exponent for shadowing (default 3.0)")
    p.add_argument("--sigma", help="shadowing std-dev in dB (default 4.0)")
    p.add_argument("--mode", help="wave or contention (default wave)")
    p.add_argument("--slots", help="slots per contention period (default 16)")
    p.add_argument("--seed", help="base seed (default 1)")
    p.add_argument("--replicates", help="replicates per node count (default 1)")
    p.add_argument("--delta", help="offset table step (default 0.01*R)")
    p.add_argument("--precision", help="round coordinates to this many decimals before comparing")
    p.add_argument("--out", help="output directory")


def build_plan(file_values: dict[str, str], args: argparse.Namespace) -> ExperimentPlan:
    values = dict(file_values)
    for key in PLAN_KEYS:
        given = getattr(args, key.replace("-", "_"), None)
        if given is not None:
            values[key] = given
    unknown = set(values) - set(PLAN_KEYS)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, raw in values.items():
        name, conv = PLAN_KEYS[key]
        try:
            kwargs[name] = conv(raw)
        except ValueError:
            raise ValueError(f"bad value for {key}: {raw!r}") from None
    return ExperimentPlan(**kwargs)


def _report(summary) -> None:
    for model, rep in summary.aggregates.items():
        print(f"{model}: {rep.samples} observing nodes, mean collisions seen "
              f"{rep.global_mean!r}, {len(rep.buckets)} degree buckets")
    for res in summary.errors:
        print(f"warning: {res.model} n={res.nodes} r={res.replicate}: {res.error}", file=sys.stderr)
    print(f"wrote {summary.out}")


def cmd_simulate(args) -> int:
    file_values = parse_config(Path(args.config).read_text()) if args.config else {}
    plan = build_plan(file_values, args)
    if len(plan.nodes) != 1:
        raise ValueError("simulate takes a single --nodes value; use campaign for sweeps")
    _report(run_campaign(plan))
    return 0


def cmd_campaign(args) -> int:
    plan = build_plan(parse_config(Path(args.plan).read_text()), args)
    _report(run_campaign(plan))
    return 0


def cmd_plot(args) -> int:
    for path in emit_plots(args.input):
        print(path)
    return 0


def cmd_table(args) -> int:
    if args.action == "build":
        if args.rings is None or args.range is None or args.delta is None:
            raise ValueError("table build needs --rings, --range and --delta")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for n in parse_counts(args.rings):
            table = build_offset_table(RingModelParams(args.range, n), args.delta)
            path = out / f"table_n{n}.csv"
            table.to_csv(path)
            check = check_table(table)
            print(f"{path}: {len(table)} entries, {'ok' if check.ok else 'FAILED'}")
        return 0
    if not args.files:
        raise ValueError("table inspect needs at least one CSV file")
    failed = 0
    for f in args.files:
        table = OffsetTable.from_csv(Path(f))
        check = check_table(table)
        if check.ok:
            print(f"{f}: ok (n={table.ring}, R={table.radio_range!r}, {len(table)} entries)")
        else:
            failed += 1
            print(f"{f}: FAILED: " + "; ".join(check.problems))
    return 1 if failed else 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringcoord", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run replicates for one node count")
    p.add_argument("--config", help="flat key = value file; flags override it")
    _add_plan_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("campaign", help="run a plan over node counts and models")
    p.add_argument("--plan", required=True, help="flat key = value plan file")
    _add_plan_flags(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("plot", help="write gnuplot data and script for a campaign")
    p.add_argument("--in", dest="input", required=True, help="campaign directory")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("table", help="build or check offset tables")
    p.add_argument("action", choices=["build", "inspect"])
    p.add_argument("files", nargs="*", help="table CSVs (inspect)")
    p.add_argument("--rings", help="ring range, e.g. 1:5 or 1,2,3 (build)")
    p.add_argument("--range", type=float, help="radio range R (build)")
    p.add_argument("--delta", type=float, help="offset step (build)")
    p.add_argument("--out", default=".", help="output directory (build)")
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
