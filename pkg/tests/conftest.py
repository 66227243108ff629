import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def record(criterion, ok, detail=""):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def unit_disk_samples(count, seed):
    """Uniform points in the unit disk (polar sampling with sqrt radius)."""
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0.0, 1.0, count))
    t = rng.uniform(0.0, 2 * math.pi, count)
    return r * np.cos(t), r * np.sin(t)


def monte_carlo_areas(ring, radio_range, offset, samples):
    """Estimate inner/outer areas of a node disk by classifying random points.

    Returns ((inner, inner_se), (outer, outer_se)).
    """
    ux, uy = samples
    dist = (ring - 1) * radio_range + offset
    r = np.hypot(dist + radio_range * ux, radio_range * uy)
    full = math.pi * radio_range**2
    out = []
    for hits in ((r <= (ring - 1) * radio_range).sum(), (r > ring * radio_range).sum()):
        p = hits / len(ux)
        out.append((full * p, full * math.sqrt(p * (1 - p) / len(ux))))
    return tuple(out)


def equal_lens(r, d):
    """Intersection area of two circles of equal radius r at centre distance d."""
    return 2 * r**2 * math.acos(d / (2 * r)) - d / 2 * math.sqrt(4 * r**2 - d**2)


@pytest.fixture(scope="session")
def disk_samples_1e6():
    return unit_disk_samples(10**6, seed=20240601)
