"""Coordinate-collision combinatorics and empirical collision counting."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Z95 = 1.959963984540054
LOW_CONFIDENCE_SAMPLES = 5


class MissingCoordinateError(KeyError):
    pass


def coordinate_space_size(k: int) -> int:
    """Number of (inner, same, outer) neighbour splits of ``k`` with at least one inner."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return k * (k + 1) // 2


def enumerate_coordinate_space(k: int) -> list[tuple[int, int, int]]:
    return [(m, o, k - m - o) for m in range(1, k + 1) for o in range(0, k - m + 1)]


def expected_collisions(k: int, exact: bool = False):
    """Expected number of equal pairs among ``k`` neighbours with uniform coordinates.

    Equals C(k, 2) / N(k) = (k - 1) / (k + 1). ``exact=True`` returns a Fraction.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    value = Fraction(math.comb(k, 2), coordinate_space_size(k))
    return value if exact else float(value)


def pair_collisions(values: Iterable) -> int:
    """Number of unordered pairs sharing the same value."""
    return sum(c * (c - 1) // 2 for c in Counter(values).values())


def simulate_uniform_collisions(k: int, trials: int, rng: np.random.Generator,
                                chunk: int = 10_000) -> tuple[float, float]:
    """Monte Carlo of the uniform-coordinate model: mean equal-pair count and its standard error."""
    n_values = coordinate_space_size(k)
    totals = np.empty(trials)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        draws = rng.integers(0, n_values, size=(m, k))
        keys = draws + (np.arange(m) * n_values)[:, None]
        counts = np.bincount(keys.ravel(), minlength=m * n_values).reshape(m, n_values)
        totals[done:done + m] = (counts * (counts - 1) // 2).sum(axis=1)
        done += m
    return float(totals.mean()), float(totals.std(ddof=1) / math.sqrt(trials))


def quantize(value: float, digits: int | None) -> float:
    return value if digits is None else round(value, digits)


@dataclass(frozen=True)
class DegreeBucket:
    degree: int
    samples: int
    mean: float
    ci95: float

    @property
    def low_confidence(self) -> bool:
        return self.samples < LOW_CONFIDENCE_SAMPLES


@dataclass
class CollisionReport:
    buckets: dict[int, DegreeBucket]
    global_mean: float
    samples: int
    per_node: dict = field(default_factory=dict)  # node -> (degree, collisions)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "samples", "mean_collisions", "ci95_half_width"])
        for deg in sorted(self.buckets):
            b = self.buckets[deg]
            w.writerow([deg, b.samples, repr(b.mean), repr(b.ci95)])
        return buf.getvalue()


def summarize(observations: Iterable[tuple[int, int]]) -> CollisionReport:
    """Bucket ``(degree, collisions)`` observations by degree.

    Each bucket gets its mean and a normal-approximation 95% half-width from the
    sample variance (zero for single-sample buckets).
    """
    by_degree = defaultdict(list)
    all_values = []
    for degree, collisions in observations:
        by_degree[degree].append(collisions)
        all_values.append(collisions)
    buckets = {}
    for degree in sorted(by_degree):
        vals = np.asarray(by_degree[degree], dtype=float)
        sd = vals.std(ddof=1) if len(vals) > 1 else 0.0
        buckets[degree] = DegreeBucket(degree, len(vals), float(vals.mean()),
                                       float(Z95 * sd / math.sqrt(len(vals))))
    gmean = float(np.mean(all_values)) if all_values else 0.0
    return CollisionReport(buckets, gmean, len(all_values))


def count_collisions(neighbors: Mapping, coordinates: Mapping, nodes: Iterable | None = None,
                     digits: int | None = None) -> CollisionReport:
    """Collisions seen by each node: pairs of its neighbours with identical coordinates.

    Equality is exact on the stored floats unless ``digits`` rounds them first.
    The degree used for bucketing is the size of the node's neighbour set.
    """
    observers = list(neighbors if nodes is None else nodes)
    per_node = {}
    for node in observers:
        nbrs = neighbors[node]
        try:
            values = [quantize(coordinates[v], digits) for v in nbrs]
        except KeyError as exc:
            raise MissingCoordinateError(f"node {exc.args[0]!r} has no coordinate") from None
        per_node[node] = (len(values), pair_collisions(values))
    report = summarize(per_node.values())
    report.per_node = per_node
    return report


def read_report_csv(text: str) -> dict[int, DegreeBucket]:
    rows = csv.DictReader(io.StringIO(text))
    return {int(r["degree"]): DegreeBucket(int(r["degree"]), int(r["samples"]),
                                           float(r["mean_collisions"]), float(r["ci95_half_width"]))
            for r in rows}
