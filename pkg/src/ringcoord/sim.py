"""Discrete-event simulation of deployment, radio links and ring-wave initialisation.

Node id 0 is the sink; sensors are numbered 1..count. The initialisation runs
in phases: during phase ``r`` every ring-``r`` node sends a preamble and then
one packet (carrying its ring number) in a slot of the contention period.
Listeners set their ring from the first packet they decode and file every
packet from rings ``n - 1``, ``n`` and ``n + 1`` into their census.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .mapper import MappingResult, NeighborCensus, TableSet

SINK = 0


class SimulationError(RuntimeError):
    pass


class DisconnectedSinkError(SimulationError):
    """The sink has no radio links; ``outcome`` holds the all-uninitialised result."""

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


@dataclass(frozen=True)
class Topology:
    width: float
    height: float
    sink: tuple[float, float]
    positions: np.ndarray  # (count + 1, 2); row 0 is the sink
    seed: int | None = None

    @property
    def count(self) -> int:
        return len(self.positions) - 1

    @property
    def sensor_ids(self) -> range:
        return range(1, len(self.positions))


def place_nodes(count: int, width: float = 50.0, height: float = 50.0,
                sink: tuple[float, float] = (25.0, 25.0), seed: int = 0) -> Topology:
    """Uniform i.i.d. sensor positions in ``[0, width) x [0, height)``."""
    if count < 1:
        raise ValueError(f"need at least one node, got {count}")
    if not (width > 0 and height > 0):
        raise ValueError(f"field must have positive size, got {width}x{height}")
    if not (0 <= sink[0] <= width and 0 <= sink[1] <= height):
        raise ValueError(f"sink {sink} lies outside the field")
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(0.0, width, count), rng.uniform(0.0, height, count)])
    positions = np.vstack([np.asarray(sink, dtype=float), pts])
    return Topology(float(width), float(height), (float(sink[0]), float(sink[1])), positions, seed)


def topology_from_points(points, sink=(0.0, 0.0), width=None, height=None) -> Topology:
    """Hand-built topology, mostly for tests and worked examples."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    positions = np.vstack([np.asarray(sink, dtype=float), pts])
    w = float(positions[:, 0].max()) if width is None else float(width)
    h = float(positions[:, 1].max()) if height is None else float(height)
    return Topology(w, h, (float(sink[0]), float(sink[1])), positions, None)


@dataclass(frozen=True)
class PropagationConfig:
    model: Literal["freespace", "shadowing"] = "freespace"
    radio_range: float = 10.0
    eta: float = 3.0
    sigma: float = 4.0
    d0: float = 1.0
    pl_d0: float = 40.0
    tx_power: float = 0.0
    threshold: float | None = None  # dBm; None puts the deterministic cutoff at radio_range

    def __post_init__(self):
        if self.model not in ("freespace", "shadowing"):
            raise ValueError(f"unknown propagation model {self.model!r}")
        if not self.radio_range > 0:
            raise ValueError("radio range must be positive")
        if self.sigma < 0 or self.d0 <= 0:
            raise ValueError("sigma must be >= 0 and d0 > 0")

    def mean_received_power(self, d):
        d = np.maximum(np.asarray(d, dtype=float), 1e-300)
        return self.tx_power - self.pl_d0 - 10.0 * self.eta * np.log10(d / self.d0)

    @property
    def receive_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return float(self.mean_received_power(self.radio_range))


def build_links(topology: Topology, prop: PropagationConfig, seed: int = 0) -> list[list[int]]:
    """Symmetric adjacency lists (sorted), sink included as node 0.

    Free space links every pair within ``radio_range``. Shadowing draws one
    zero-mean normal dB term per unordered pair and links the pair when the
    received power reaches the threshold.
    """
    pts = topology.positions
    size = len(pts)
    iu, ju = np.triu_indices(size, k=1)
    dist = np.hypot(pts[iu, 0] - pts[ju, 0], pts[iu, 1] - pts[ju, 1])
    if prop.model == "freespace":
        linked = dist <= prop.radio_range
    else:
        rng = np.random.default_rng(seed)
        shadow = rng.normal(0.0, prop.sigma, size=len(dist)) if prop.sigma > 0 else np.zeros(len(dist))
        linked = prop.mean_received_power(dist) + shadow >= prop.receive_threshold
    adj = [[] for _ in range(size)]
    for i, j in zip(iu[linked].tolist(), ju[linked].tolist()):
        adj[i].append(j)
        adj[j].append(i)
    return adj


@dataclass(frozen=True)
class ProtocolConfig:
    mode: Literal["wave", "contention"] = "wave"
    slots: int = 16
    slot_duration: float = 1.0
    preamble_duration: float = 4.0
    max_rings: int = 1000

    def __post_init__(self):
        if self.mode not in ("wave", "contention"):
            raise ValueError(f"unknown protocol mode {self.mode!r}")
        if self.slots < 1 or self.max_rings < 1:
            raise ValueError("slots and max_rings must be >= 1")
        if self.slot_duration <= 0 or self.preamble_duration <= 0:
            raise ValueError("durations must be positive")


@dataclass
class SimOutcome:
    ring: np.ndarray  # -1 marks uninitialised nodes; the sink is ring 0
    inner: np.ndarray
    same: np.ndarray
    outer: np.ndarray
    messages_sent: np.ndarray
    preambles_sent: np.ndarray
    listen_periods: np.ndarray
    mode: str
    phases: int
    events: list = field(default_factory=list)

    def initialized(self, node: int) -> bool:
        return node != SINK and self.ring[node] >= 1

    @property
    def initialized_nodes(self) -> list[int]:
        return [v for v in range(1, len(self.ring)) if self.ring[v] >= 1]

    def census(self, node: int) -> NeighborCensus:
        if not self.initialized(node):
            raise SimulationError(f"node {node} is not initialised")
        return NeighborCensus(int(self.ring[node]), int(self.inner[node]),
                              int(self.same[node]), int(self.outer[node]))

    def event_log_lines(self) -> list[str]:
        return ["time,event,node,detail"] + [f"{t!r},{kind},{node},{detail}"
                                             for t, kind, node, detail in self.events]


# event kinds, ordered so that at equal times phase bookkeeping brackets the slots
_PHASE_START, _PREAMBLE, _SLOT, _PHASE_END = range(4)


def run_initialization(topology: Topology, adjacency: list[list[int]],
                       proto: ProtocolConfig = ProtocolConfig(), seed: int = 0,
                       log: bool = False) -> SimOutcome:
    size = len(topology.positions)
    ring = np.full(size, -1, dtype=int)
    ring[SINK] = 0
    counters = {name: np.zeros(size, dtype=int) for name in
                ("inner", "same", "outer", "sent", "preambles", "waited")}
    rng = np.random.default_rng(seed)
    period = proto.preamble_duration + proto.slots * proto.slot_duration
    events = []
    queue = []
    seq = itertools.count()
    awake = set()  # unsynchronised nodes that heard a preamble this phase
    phases = 0

    def push(time, kind, payload):
        heapq.heappush(queue, (time, kind, next(seq), payload))

    def deliver(tx, rx, time):
        if rx == SINK:
            return
        if ring[rx] < 0:
            if ring[tx] + 1 > proto.max_rings:
                return
            ring[rx] = ring[tx] + 1
            if log:
                events.append((time, "sync", rx, f"ring={ring[rx]}"))
        diff = ring[tx] - ring[rx]
        if diff == -1:
            counters["inner"][rx] += 1
        elif diff == 0:
            counters["same"][rx] += 1
        elif diff == 1:
            counters["outer"][rx] += 1

    if not adjacency[SINK]:
        outcome = _outcome(ring, counters, proto.mode, 0, events)
        raise DisconnectedSinkError("sink has no radio links", outcome)

    push(0.0, _PHASE_START, 0)
    while queue:
        time, kind, _, payload = heapq.heappop(queue)
        if kind == _PHASE_START:
            r = payload
            txs = np.flatnonzero(ring == r).tolist()
            if not txs:
                break
            phases += 1
            awake.clear()
            if proto.mode == "wave":
                slot_of = {tx: i for i, tx in enumerate(txs)}
                slot_len = proto.slots * proto.slot_duration / len(txs)
            else:
                picks = rng.integers(0, proto.slots, size=len(txs))
                slot_of = dict(zip(txs, picks.tolist()))
                slot_len = proto.slot_duration
            by_slot = {}
            for tx in txs:
                push(time, _PREAMBLE, tx)
                by_slot.setdefault(slot_of[tx], []).append(tx)
            for s, group in sorted(by_slot.items()):
                push(time + proto.preamble_duration + s * slot_len, _SLOT, (s, group))
            push(time + period, _PHASE_END, r)
        elif kind == _PREAMBLE:
            tx = payload
            counters["preambles"][tx] += 1
            awake.update(v for v in adjacency[tx] if v != SINK and ring[v] < 0)
            if log:
                events.append((time, "preamble", tx, ""))
        elif kind == _SLOT:
            s, group = payload
            for tx in group:
                counters["sent"][tx] += 1
                if log:
                    events.append((time, "packet", tx, f"slot={s} ring={ring[tx]}"))
            if proto.mode == "wave":
                for tx in group:
                    for rx in adjacency[tx]:
                        deliver(tx, rx, time)
                continue
            heard = {}
            for tx in group:
                for rx in adjacency[tx]:
                    heard[rx] = tx if rx not in heard else None
            transmitting = set(group)
            for rx, tx in heard.items():
                if tx is None or rx in transmitting:
                    if log:
                        events.append((time, "loss", rx, f"slot={s}"))
                    continue
                deliver(tx, rx, time)
        else:
            r = payload
            for v in awake:
                if ring[v] < 0:
                    counters["waited"][v] += 1
            if r + 1 <= proto.max_rings:
                push(time, _PHASE_START, r + 1)
    return _outcome(ring, counters, proto.mode, phases, events)


def _outcome(ring, counters, mode, phases, events) -> SimOutcome:
    # a synchronised node listens to the periods of rings n-1, n and n+1,
    # plus every earlier period it woke up for without decoding anything
    listen = counters["waited"].copy()
    listen[ring >= 1] += 3
    listen[SINK] = 0
    return SimOutcome(ring, counters["inner"], counters["same"], counters["outer"],
                      counters["sent"], counters["preambles"], listen, mode, phases, events)


def bfs_rings(adjacency: list[list[int]], source: int = SINK) -> np.ndarray:
    """Hop counts from ``source`` (-1 when unreachable)."""
    hops = np.full(len(adjacency), -1, dtype=int)
    hops[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency[u]:
                if hops[v] < 0:
                    hops[v] = hops[u] + 1
                    nxt.append(v)
        frontier = nxt
    return hops


def compute_all_coordinates(outcome: SimOutcome, tables: TableSet) -> dict[int, MappingResult]:
    return {v: tables.assign(outcome.census(v)) for v in outcome.initialized_nodes}


def observer_neighbors(adjacency: list[list[int]], coordinates) -> dict[int, list[int]]:
    """Neighbour lists restricted to nodes holding a coordinate (sink excluded)."""
    return {v: [u for u in adjacency[v] if u in coordinates] for v in coordinates}

