"""Theoretical ring-intersection areas and offset tables.

A node of ring ``n`` sits at distance ``(n - 1) * R + offset`` from the sink.
Its radio disk (radius ``R``) overlaps three regions:

* ``A``: the inner disk of radius ``(n - 1) * R`` (ring ``n - 1`` and below),
* ``C``: everything beyond radius ``n * R`` (ring ``n + 1`` and above),
* ``B``: the remainder, i.e. ring ``n`` itself.

Areas are computed by adaptive quadrature of the vertical chord length of the
disk/disk overlap. ``area_inner_closed_form`` evaluates the angular closed form
for cross-checking only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate


class GeometryError(ValueError):
    """Invalid ring-model parameters."""


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""


# absolute quadrature tolerance, relative to the disk area pi * R**2
QUAD_TOL = 1e-8
ROUNDOFF = 1e-9


@dataclass(frozen=True)
class RingModelParams:
    radio_range: float
    ring: int

    def __post_init__(self):
        if not self.radio_range > 0:
            raise GeometryError(f"radio range must be > 0, got {self.radio_range}")
        if self.ring < 1:
            raise GeometryError(f"ring index must be >= 1, got {self.ring}")

    @property
    def inner_radius(self) -> float:
        return (self.ring - 1) * self.radio_range

    @property
    def outer_radius(self) -> float:
        return self.ring * self.radio_range

    def center_distance(self, offset: float) -> float:
        return self.inner_radius + offset


@dataclass(frozen=True)
class AreaFractions:
    frac_a: float
    frac_b: float
    frac_c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.frac_a, self.frac_b, self.frac_c])

    def total(self) -> float:
        return self.frac_a + self.frac_b + self.frac_c


def _check_offset(params: RingModelParams, offset: float) -> None:
    if not 0.0 <= offset < params.radio_range:
        raise GeometryError(
            f"offset must lie in [0, {params.radio_range}), got {offset}"
        )


def disk_overlap(rho: float, radius: float, dist: float) -> float:
    """Area shared by the disk of radius ``rho`` at the origin and the disk of
    radius ``radius`` centred at distance ``dist``, by adaptive quadrature."""
    if rho <= 0.0:
        return 0.0
    if dist + radius <= rho:
        return math.pi * radius**2
    if dist + rho <= radius:
        return math.pi * rho**2
    if dist >= rho + radius:
        return 0.0

    lo = max(dist - radius, -rho)
    hi = min(dist + radius, rho)

    def chord(x):
        h_node = radius**2 - (x - dist) ** 2
        h_ring = rho**2 - x**2
        h = min(h_node, h_ring)
        return 2.0 * math.sqrt(h) if h > 0.0 else 0.0

    # the two boundary circles cross above this abscissa; the integrand has a kink there
    cross = (rho**2 - radius**2 + dist**2) / (2.0 * dist)
    points = [cross] if lo < cross < hi else None

    tol = QUAD_TOL * math.pi * radius**2
    value, abserr, *info = integrate.quad(
        chord, lo, hi, points=points, epsabs=tol * 1e-2, epsrel=1e-12,
        limit=200, full_output=1,
    )
    if abserr > tol:
        raise QuadratureError(
            f"overlap quadrature error {abserr:.3g} exceeds {tol:.3g} "
            f"(rho={rho}, radius={radius}, dist={dist})"
        )
    return value


def area_inner(params: RingModelParams, offset: float) -> float:
    """Area of the node disk lying inside radius ``(n - 1) * R``."""
    _check_offset(params, offset)
    if params.ring == 1:
        return 0.0
    return disk_overlap(params.inner_radius, params.radio_range,
                        params.center_distance(offset))


def area_outer(params: RingModelParams, offset: float) -> float:
    """Area of the node disk lying strictly beyond radius ``n * R``."""
    _check_offset(params, offset)
    full = math.pi * params.radio_range**2
    inside = disk_overlap(params.outer_radius, params.radio_range,
                          params.center_distance(offset))
    return max(full - inside, 0.0)


def area_fractions(params: RingModelParams, offset: float) -> AreaFractions:
    full = math.pi * params.radio_range**2
    frac_a = area_inner(params, offset) / full
    frac_c = area_outer(params, offset) / full
    frac_b = 1.0 - frac_a - frac_c
    if frac_b < 0.0:
        if frac_b < -ROUNDOFF:
            raise GeometryError(f"negative ring-n area fraction {frac_b}")
        frac_b = 0.0
    return AreaFractions(frac_a, frac_b, frac_c)


def lens_area(r1: float, r2: float, d: float) -> float:
    """Closed-form intersection area of two circles (radii r1, r2, centre distance d)."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    d1 = (r1**2 - r2**2 + d**2) / (2 * d)
    d2 = d - d1
    a1 = r1**2 * math.acos(max(-1.0, min(1.0, d1 / r1))) - d1 * math.sqrt(max(r1**2 - d1**2, 0.0))
    a2 = r2**2 * math.acos(max(-1.0, min(1.0, d2 / r2))) - d2 * math.sqrt(max(r2**2 - d2**2, 0.0))
    return a1 + a2


def area_inner_closed_form(params: RingModelParams, offset: float) -> float:
    """Angular closed form for the inner area, as printed in polar coordinates.

    Integrates between the two circle-crossing angles ``theta1`` and
    ``theta2 = pi - theta1``, from the near side of the node circle out to the
    inner ring boundary. It ignores any part of the overlap lying outside that
    angular sector, so it is only exact when the tangent points seen from the
    sink fall outside the inner disk, i.e. ``D**2 - R**2 >= ((n-1) R)**2``.
    Use :func:`closed_form_discrepancy` to compare against quadrature.
    """
    _check_offset(params, offset)
    if params.ring == 1:
        return 0.0
    n = params.ring
    R = params.radio_range
    D = params.center_distance(offset)
    rho = params.inner_radius

    y = (rho**2 - R**2 + D**2) / (2.0 * D)
    x = math.sqrt(max(rho**2 - y**2, 0.0))
    theta1 = math.atan2(y, x)
    theta2 = math.atan2(-y, x) + math.pi

    def antiderivative(theta):
        c = math.cos(theta)
        root = math.sqrt(max(R**2 - (D * c) ** 2, 0.0))
        return (
            (n**2 - 2 * n) * R**2 / 2.0 * theta
            + D**2 / 2.0 * math.sin(theta) * c
            + D / 2.0 * (-c * root - R**2 * math.atan2(D * c, root) / D)
        )

    return antiderivative(theta2) - antiderivative(theta1)


@dataclass(frozen=True)
class ClosedFormCheck:
    ring: int
    offset: float
    quadrature: float
    closed_form: float
    rel_error: float
    agrees: bool


def closed_form_discrepancy(params: RingModelParams, offset: float,
                            rtol: float = 1e-4) -> ClosedFormCheck:
    """Report (never reconcile) the gap between quadrature and the closed form."""
    quad = area_inner(params, offset)
    closed = area_inner_closed_form(params, offset)
    scale = max(abs(quad), math.pi * params.radio_range**2 * 1e-12)
    rel = abs(closed - quad) / scale
    return ClosedFormCheck(params.ring, offset, quad, closed, rel, rel <= rtol)


@dataclass(frozen=True)
class OffsetTable:
    ring: int
    radio_range: float
    delta_offset: float
    offsets: np.ndarray
    fractions: np.ndarray  # shape (len(offsets), 3): frac_a, frac_b, frac_c

    def __len__(self):
        return len(self.offsets)

    def entry(self, i: int) -> tuple[float, AreaFractions]:
        fa, fb, fc = self.fractions[i]
        return float(self.offsets[i]), AreaFractions(float(fa), float(fb), float(fc))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# n={self.ring} R={self.radio_range!r} delta={self.delta_offset!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["offset", "frac_a", "frac_b", "frac_c"])
        for off, (fa, fb, fc) in zip(self.offsets, self.fractions):
            writer.writerow([repr(float(off)), repr(float(fa)), repr(float(fb)), repr(float(fc))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "OffsetTable":
        """Parse a table from a path or from CSV text."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text()
        else:
            text = source
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise GeometryError("offset table CSV must start with a '# n=.. R=.. delta=..' line")
        meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
        try:
            ring, radio_range, delta = int(meta["n"]), float(meta["R"]), float(meta["delta"])
        except KeyError as exc:
            raise GeometryError(f"missing table metadata key {exc}") from None
        reader = csv.DictReader(lines[1:])
        if reader.fieldnames != ["offset", "frac_a", "frac_b", "frac_c"]:
            raise GeometryError(f"unexpected table header {reader.fieldnames}")
        rows = [[float(r["offset"]), float(r["frac_a"]), float(r["frac_b"]), float(r["frac_c"])]
                for r in reader]
        data = np.array(rows, dtype=float).reshape(-1, 4)
        return cls(ring, radio_range, delta, data[:, 0].copy(), data[:, 1:].copy())


def build_offset_table(params: RingModelParams, delta_offset: float) -> OffsetTable:
    R = params.radio_range
    if not 0.0 < delta_offset < R:
        raise GeometryError(f"table step must lie in (0, R={R}), got {delta_offset}")
    count = math.ceil(R / delta_offset)
    offsets = np.arange(count) * delta_offset
    offsets = offsets[offsets < R]
    fractions = np.array([area_fractions(params, float(o)).as_array() for o in offsets])
    return OffsetTable(params.ring, R, delta_offset, offsets, fractions)


@lru_cache(maxsize=64)
def cached_offset_table(ring: int, radio_range: float, delta_offset: float) -> OffsetTable:
    return build_offset_table(RingModelParams(radio_range, ring), delta_offset)


@dataclass
class TableCheck:
    ok: bool
    problems: list[str]


def check_table(table: OffsetTable, tol: float = 1e-9) -> TableCheck:
    """Verify conservation, positivity, monotonicity and step regularity."""
    problems = []
    fr = table.fractions
    if len(table) == 0:
        return TableCheck(False, ["table is empty"])
    sums = fr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        problems.append(f"fractions do not sum to 1 at {bad.size} entries (first offset {table.offsets[bad[0]]!r})")
    if (fr < -tol).any():
        problems.append("negative fractions present")
    if (fr[:, 1] <= 0).any():
        problems.append("ring-n fraction is zero somewhere")
    steps = np.diff(table.offsets)
    if steps.size and not np.allclose(steps, table.delta_offset, rtol=1e-9, atol=0):
        problems.append("offsets are not evenly spaced by delta")
    if (np.diff(fr[:, 0]) > tol).any():
        problems.append("frac_a increases with offset")
    if (np.diff(fr[:, 2]) < -tol).any():
        problems.append("frac_c decreases with offset")
    if abs(fr[0, 2]) > 1e-6:
        problems.append(f"frac_c at offset 0 is {fr[0, 2]!r}, expected 0")
    return TableCheck(not problems, problems)
