"""Example covers and orbit specs used by the demos, tests and CLI."""

from __future__ import annotations

import math

from .covering import Cover, Element, GridDomain

INF = math.inf


def _box(lo, hi):
    return (tuple(lo), tuple(hi))


def kkm_triangle(resolution=32):
    """Three elements on the CFK triangle, element i missing face F_{3,1,2}[i]."""
    d = GridDomain(s=2, t=0, resolution=resolution)
    c = Cover([
        Element([_box((-INF, -INF), (INF, 0.6))], "low"),
        Element([_box((0.4, -INF), (INF, INF))], "right"),
        Element([_box((-INF, 0.55), (0.45, INF))], "corner"),
    ])
    return c, d


KKM_TRIANGLE_FACE_MISSES = [(3, None), (1, None), (2, None)]


def tube_cover(L=3.0, resolution=32):
    """Delta^1 x R: two alternating families of bands over x < 0.6, one slab over x > 0.4."""
    d = GridDomain(s=1, t=1, t_bounds=L, resolution=resolution)
    m = int(math.ceil(L)) + 1
    bands = {0: [], 1: []}
    for k in range(-m, m + 1):
        bands[k % 2].append(_box((-INF, k - 0.6), (0.6, k + 0.6)))
    c = Cover([
        Element(bands[0], "even bands"),
        Element(bands[1], "odd bands"),
        Element([_box((0.4, -INF), (INF, INF))], "slab"),
    ])
    return c, d


def interval_cover(L=4.0, resolution=32):
    """R (s = 0): bounded intervals (k - 0.6, k + 0.6)."""
    d = GridDomain(s=0, t=1, t_bounds=L, resolution=resolution)
    m = int(math.ceil(L)) + 1
    c = Cover([Element([_box((k - 0.6,), (k + 0.6,))], f"I{k}") for k in range(-m, m + 1)])
    return c, d


def segment_pair(resolution=32):
    """[0, 1] covered by (-inf, 0.6) and (0.4, inf); Lebesgue number 0.1."""
    d = GridDomain(s=1, t=0, resolution=resolution)
    c = Cover([Element([_box((-INF,), (0.6,))], "left"), Element([_box((0.4,), (INF,))], "right")])
    return c, d


SEGMENT_PAIR_FACE_MISSES = [(2, None), (1, None)]


def square_quadrants(resolution=32):
    """Delta^1 x Delta^1 covered by four overlapping quadrants."""
    d = GridDomain(s=1, t=0, s2=1, resolution=resolution)
    lo, hi = (-INF, 0.6), (0.4, INF)
    elems = []
    for name, (a, b) in {"ll": (lo, lo), "rl": (hi, lo), "lr": (lo, hi), "rr": (hi, hi)}.items():
        elems.append(Element([_box((a[0], b[0]), (a[1], b[1]))], name))
    return Cover(elems), d


# the left half misses the face x = 1 (j = 2), the right half misses x = 0 (j = 1)
SQUARE_QUADRANTS_FACE_MISSES = [(2, 2), (1, 2), (2, 1), (1, 1)]


def whole_segment(resolution=32):
    """One element covering Delta^1; it meets every face, so hypothesis (i) fails."""
    d = GridDomain(s=1, t=0, resolution=resolution)
    return Cover([Element([_box((-INF,), (INF,))], "all")]), d


CERTIFY_SUITE = {
    "kkm-triangle": kkm_triangle,
    "tube": tube_cover,
    "intervals": interval_cover,
    "segment-pair": segment_pair,
}

ORBIT_SPECS = {
    "unit-unit": {"blocks": [{"type": "unit"}, {"type": "unit"}]},
    "disc-2": {"blocks": [{"type": "quadratic", "D": 2}]},
    "disc-3": {"blocks": [{"type": "quadratic", "D": 3}]},
    "disc-7": {"blocks": [{"type": "quadratic", "D": 7}]},
    "unit-disc-2": {"blocks": [{"type": "unit"}, {"type": "quadratic", "D": 2}]},
    "disc-2-disc-3": {"blocks": [{"type": "quadratic", "D": 2}, {"type": "quadratic", "D": 3}]},
}
