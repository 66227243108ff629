"""Experiment campaigns: place, link, initialise, map, count collisions, write CSVs."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collisions import CollisionReport, count_collisions, expected_collisions, read_report_csv, summarize
from .mapper import TableSet
from .sim import (DisconnectedSinkError, PropagationConfig, ProtocolConfig, SimulationError,
                  build_links, compute_all_coordinates, observer_neighbors, place_nodes,
                  run_initialization)

log = logging.getLogger(__name__)

NODE_DUMP_HEADER = ["node_id", "x", "y", "ring", "degree", "count_inner", "count_same",
                    "count_outer", "matched_offset", "proj_distance", "coordinate",
                    "collisions_seen", "initialized"]
SUMMARY_HEADER = ["model", "nodes", "replicate", "seed", "initialized", "uninitialized",
                  "global_mean", "phases", "error"]


class MissingDataError(FileNotFoundError):
    pass


@dataclass
class ExperimentPlan:
    nodes: list[int] = field(default_factory=lambda: list(range(50, 751, 50)))
    replicates: int = 1
    models: list[str] = field(default_factory=lambda: ["freespace"])
    mode: str = "wave"
    slots: int = 16
    width: float = 50.0
    height: float = 50.0
    sink_x: float = 25.0
    sink_y: float = 25.0
    radio_range: float = 10.0
    eta: float = 3.0
    sigma: float = 4.0
    delta: float | None = None  # table step; None means 1% of the range
    max_table_ring: int = 8
    precision: int | None = None  # round coordinates to this many decimals before comparing
    seed: int = 1
    out: str = "campaign_out"
    keep_dumps: bool = True

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("plan needs at least one node count")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.replicates > 999 or max(self.nodes) > 999:
            raise ValueError("seed policy supports at most 999 nodes and 999 replicates per run")
        for m in self.models:
            if m not in ("freespace", "shadowing"):
                raise ValueError(f"unknown model {m!r}")

    def propagation(self, model: str) -> PropagationConfig:
        return PropagationConfig(model, self.radio_range, self.eta, self.sigma)

    def protocol(self) -> ProtocolConfig:
        return ProtocolConfig(self.mode, self.slots)

    def tables(self) -> TableSet:
        return TableSet(self.radio_range, self.delta, self.max_table_ring)


def run_seed(base_seed: int, count: int, replicate: int) -> int:
    return base_seed * 10**6 + count * 10**3 + replicate


def sub_seed(seed: int, stream: int) -> int:
    """Independent integer seed for one random stream (placement, links, slots) of a run."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


@dataclass
class RunResult:
    model: str
    nodes: int
    replicate: int
    seed: int
    rows: list[list]
    report: CollisionReport
    uninitialized: int
    phases: int
    error: str = ""


def run_single(plan: ExperimentPlan, model: str, count: int, replicate: int,
               tables: TableSet | None = None) -> RunResult:
    tables = tables or plan.tables()
    seed = run_seed(plan.seed, count, replicate)
    topo = place_nodes(count, plan.width, plan.height, (plan.sink_x, plan.sink_y), sub_seed(seed, 0))
    adj = build_links(topo, plan.propagation(model), sub_seed(seed, 1))
    error = ""
    try:
        outcome = run_initialization(topo, adj, plan.protocol(), sub_seed(seed, 2))
    except DisconnectedSinkError as exc:
        outcome, error = exc.outcome, "disconnected-sink"
    mapped = compute_all_coordinates(outcome, tables)
    coords = {v: m.coordinate for v, m in mapped.items()}
    nbrs = observer_neighbors(adj, coords)
    report = count_collisions(nbrs, coords, digits=plan.precision)

    rows = []
    for v in topo.sensor_ids:
        x, y = topo.positions[v]
        if v in mapped:
            m = mapped[v]
            deg, seen = report.per_node[v]
            rows.append([v, repr(float(x)), repr(float(y)), int(outcome.ring[v]), deg,
                         int(outcome.inner[v]), int(outcome.same[v]), int(outcome.outer[v]),
                         repr(m.matched_offset), repr(m.projection_distance), repr(m.coordinate),
                         seen, 1])
        else:
            rows.append([v, repr(float(x)), repr(float(y)), "", 0, "", "", "", "", "", "", "", 0])
    return RunResult(model, count, replicate, seed, rows, report,
                     count - len(mapped), outcome.phases, error)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def dump_path(out: Path, model: str, count: int, replicate: int) -> Path:
    return out / "runs" / model / f"n{count:03d}_r{replicate:03d}.csv"


@dataclass
class CampaignSummary:
    out: Path
    aggregates: dict[str, CollisionReport]
    by_count: dict[str, dict[int, CollisionReport]]
    runs: list[RunResult]

    @property
    def errors(self) -> list[RunResult]:
        return [r for r in self.runs if r.error]


def run_campaign(plan: ExperimentPlan) -> CampaignSummary:
    """Run every (model, node count, replicate) and write dumps plus aggregates.

    Runs are independent and executed in plan order, so the aggregate files
    are byte-identical for a given plan.
    """
    out = Path(plan.out)
    tables = plan.tables()
    aggregates, by_count, runs = {}, {}, []
    summary_rows = []
    for model in plan.models:
        obs_all = []
        by_count[model] = {}
        for count in plan.nodes:
            obs_count = []
            for rep in range(plan.replicates):
                try:
                    res = run_single(plan, model, count, rep, tables)
                except SimulationError as exc:
                    log.warning("run %s n=%d r=%d failed: %s", model, count, rep, exc)
                    summary_rows.append([model, count, rep, run_seed(plan.seed, count, rep),
                                         "", "", "", "", str(exc)])
                    continue
                runs.append(res)
                obs = list(res.report.per_node.values())
                obs_count.extend(obs)
                obs_all.extend(obs)
                if plan.keep_dumps:
                    _write_csv(dump_path(out, model, count, rep), NODE_DUMP_HEADER, res.rows)
                summary_rows.append([model, count, rep, res.seed, count - res.uninitialized,
                                     res.uninitialized, repr(res.report.global_mean), res.phases,
                                     res.error])
            by_count[model][count] = summarize(obs_count)
        aggregates[model] = summarize(obs_all)
        out.mkdir(parents=True, exist_ok=True)
        try:
            (out / f"aggregate_{model}.csv").write_text(aggregates[model].to_csv())
        except OSError as exc:
            raise OSError(f"cannot write {out / f'aggregate_{model}.csv'}: {exc}") from exc
        density_rows = [[count, deg, b.samples, repr(b.mean), repr(b.ci95)]
                        for count, rep in by_count[model].items()
                        for deg, b in sorted(rep.buckets.items())]
        _write_csv(out / f"density_{model}.csv",
                   ["nodes", "degree", "samples", "mean_collisions", "ci95_half_width"],
                   density_rows)
    _write_csv(out / "summary.csv", SUMMARY_HEADER, summary_rows)
    return CampaignSummary(out, aggregates, by_count, runs)


def emit_plots(campaign_dir, max_degree: int | None = None) -> list[Path]:
    """Write gnuplot data files and a script for mean collisions vs degree."""
    d = Path(campaign_dir)
    files = sorted(d.glob("aggregate_*.csv")) if d.is_dir() else []
    if not files:
        raise MissingDataError(f"no aggregate_<model>.csv files in {d} "
                               f"(expected aggregate_freespace.csv and/or aggregate_shadowing.csv)")
    plot_dir = d / "plots"
    plot_dir.mkdir(exist_ok=True)
    written = []
    series = []
    top = 2
    for f in files:
        model = f.stem.removeprefix("aggregate_")
        buckets = read_report_csv(f.read_text())
        dat = plot_dir / f"{model}.dat"
        lines = ["# degree mean_collisions ci95_half_width samples"]
        lines += [f"{b.degree} {b.mean!r} {b.ci95!r} {b.samples}" for _, b in sorted(buckets.items())]
        dat.write_text("\n".join(lines) + "\n")
        written.append(dat)
        series.append((model, dat.name))
        if buckets:
            top = max(top, max(buckets))
    top = max_degree or top
    theory = plot_dir / "theory.dat"
    theory.write_text("# k expected_collisions\n" + "".join(
        f"{k} {expected_collisions(k)!r}\n" for k in range(2, top + 1)))
    written.append(theory)

    plots = [f"'{name}' using 1:2:3 with yerrorbars title '{model}'" for model, name in series]
    plots.append("'theory.dat' using 1:2 with lines title 'uniform model (k-1)/(k+1)'")
    script = plot_dir / "collisions.gp"
    script.write_text(
        "set terminal pngcairo size 900,600\n"
        "set output 'collisions.png'\n"
        "set xlabel 'number of neighbours'\n"
        "set ylabel 'collisions seen per node'\n"
        "set key top left\n"
        "plot " + ", \\\n     ".join(plots) + "\n"
    )
    written.append(script)
    return written


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys use CLI flag names."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("_", "-")] = value
    return cfg


def parse_counts(spec: str) -> list[int]:
    """``50,150`` or an inclusive range ``50:750:100``."""
    spec = spec.strip()
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        start, stop, step = parts if len(parts) == 3 else (*parts, 1)
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",") if p.strip()]

