"""Map neighbour-ring censuses onto the theoretical curve to get 1-D coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .geometry import AreaFractions, OffsetTable, cached_offset_table

EPSILON = 1e-9
SIMPLEX_DIAMETER = math.sqrt(2.0)


class EmptyCensusError(ValueError):
    """A node heard no neighbour at all."""


@dataclass(frozen=True)
class NeighborCensus:
    ring: int
    count_inner: int
    count_same: int
    count_outer: int

    def __post_init__(self):
        if self.ring < 1:
            raise ValueError(f"ring must be >= 1, got {self.ring}")
        if min(self.count_inner, self.count_same, self.count_outer) < 0:
            raise ValueError("neighbour counts must be non-negative")

    @property
    def total(self) -> int:
        return self.count_inner + self.count_same + self.count_outer


@dataclass(frozen=True)
class MappingResult:
    ring: int
    entry_index: int
    matched_offset: float
    projection_distance: float
    scaled_distance: float
    coordinate: float


def census_fractions(census: NeighborCensus) -> AreaFractions:
    total = census.total
    if total == 0:
        raise EmptyCensusError(f"empty neighbour census for a ring-{census.ring} node")
    return AreaFractions(census.count_inner / total, census.count_same / total,
                         census.count_outer / total)


def project_to_curve(fractions, table: OffsetTable) -> tuple[int, float]:
    """Nearest table entry (index) and its Euclidean distance in fraction space.

    Ties go to the smallest offset. Points slightly off the simplex are
    renormalised by their component sum first.
    """
    if len(table) == 0:
        raise ValueError("cannot project onto an empty offset table")
    point = fractions.as_array() if isinstance(fractions, AreaFractions) else np.asarray(fractions, float)
    s = point.sum()
    if s <= 0 or (point < 0).any():
        raise ValueError(f"fractions must be non-negative with a positive sum, got {point}")
    point = point / s
    dist = np.sqrt(((table.fractions - point) ** 2).sum(axis=1))
    i = int(np.argmin(dist))  # first minimum, i.e. smallest offset
    return i, float(dist[i])


def distance_scale(table: OffsetTable) -> float:
    """Factor turning a fraction-space distance into an offset increment.

    The increment stays strictly below the gap to the next entry (and below
    the room left in the ring after the last entry), whatever the distance.
    """
    room = min(table.delta_offset, table.radio_range - float(table.offsets[-1]))
    return room / SIMPLEX_DIAMETER * (1.0 - EPSILON)


def assign_coordinate(census: NeighborCensus, table: OffsetTable,
                      radio_range: float) -> MappingResult:
    idx, d = project_to_curve(census_fractions(census), table)
    offset = float(table.offsets[idx])
    scaled = distance_scale(table) * d
    coord = (census.ring - 1) * radio_range + offset + scaled
    return MappingResult(census.ring, idx, offset, d, scaled, coord)


class TableSet:
    """Per-ring offset tables; rings deeper than ``max_ring`` reuse the last table."""

    def __init__(self, radio_range: float, delta_offset: float | None = None,
                 max_ring: int = 8):
        if max_ring < 1:
            raise ValueError("max_ring must be >= 1")
        self.radio_range = float(radio_range)
        self.delta_offset = 0.01 * self.radio_range if delta_offset is None else float(delta_offset)
        self.max_ring = max_ring
        self._explicit: dict[int, OffsetTable] | None = None

    @classmethod
    def from_tables(cls, tables: Mapping[int, OffsetTable]) -> "TableSet":
        first = next(iter(tables.values()))
        ts = cls(first.radio_range, first.delta_offset, max(tables))
        ts._explicit = dict(tables)
        return ts

    def __getitem__(self, ring: int) -> OffsetTable:
        n = min(ring, self.max_ring)
        if self._explicit is not None:
            usable = [k for k in self._explicit if k <= n]
            return self._explicit[max(usable) if usable else min(self._explicit)]
        return cached_offset_table(n, self.radio_range, self.delta_offset)

    def assign(self, census: NeighborCensus) -> MappingResult:
        return assign_coordinate(census, self[census.ring], self.radio_range)
