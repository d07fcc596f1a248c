"""Synthetic segment sets with controlled density.

All generators take a ``numpy.random.Generator`` so that every instance is
reproducible from a seed.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Segment


def star(k: int, rng: np.random.Generator, center=(0.0, 0.0), first_id: int = 0,
         lengths=(1.0, 2.0)) -> list[Segment]:
    """``k`` segments through ``center`` with evenly spread random directions.

    Each segment has a random length in ``lengths`` and passes through the
    centre at a random interior point, so the density is exactly ``k``.
    """
    phase = rng.uniform(0.0, math.pi)
    cx, cy = center
    out = []
    for i in range(k):
        th = phase + math.pi * i / k
        L = rng.uniform(*lengths)
        f = rng.uniform(0.2, 0.8)
        ux, uy = math.cos(th), math.sin(th)
        out.append(Segment(first_id + i, (cx - f * L * ux, cy - f * L * uy),
                           (cx + (1 - f) * L * ux, cy + (1 - f) * L * uy)))
    return out


def separated_clusters(rng: np.random.Generator, clusters: int, max_size: int = 6,
                       spacing: float = 10.0) -> list[Segment]:
    """Small stars of 1 to ``max_size`` segments on a square lattice.

    Segments are at most 2 long and clusters ``spacing`` apart, so no ball
    admissible for one cluster reaches another and the density is the size of
    the largest cluster.
    """
    side = math.ceil(math.sqrt(clusters))
    out: list[Segment] = []
    for c in range(clusters):
        k = int(rng.integers(1, max_size + 1))
        center = (spacing * (c % side), spacing * (c // side))
        out += star(k, rng, center, first_id=len(out))
    return out


def random_segments(rng: np.random.Generator, n: int, density: float = 0.25,
                    lengths=(0.2, 2.0)) -> list[Segment]:
    """Uniformly placed segments with random directions and lengths.

    The square side grows with ``sqrt(n / density)`` so the expected number of
    segments per unit area stays near ``density``.
    """
    side = math.sqrt(n / density)
    out = []
    for i in range(n):
        x, y = rng.uniform(0.0, side, 2)
        L = rng.uniform(*lengths)
        th = rng.uniform(0.0, 2 * math.pi)
        out.append(Segment(i, (x, y), (x + L * math.cos(th), y + L * math.sin(th))))
    return out


def unit_grid(n: int, spacing: float = 3.0) -> list[Segment]:
    """``n`` horizontal unit segments on a square lattice; density 2 at spacing 3."""
    m = max(1, math.ceil(math.sqrt(n)))
    return [Segment(i, (spacing * (i % m), spacing * (i // m)),
                    (spacing * (i % m) + 1.0, spacing * (i // m))) for i in range(n)]


def figure_one() -> list[Segment]:
    """Four long segments tangent to the unit circle plus one short segment.

    The sides of the square ``[-1, 1]^2`` all touch the ball of radius 1 at the
    origin, and so does the short middle segment, but it is too short to count
    for that ball.  The density is 4.
    """
    return [
        Segment(0, (-1.0, -1.0), (1.0, -1.0)),
        Segment(1, (1.0, -1.0), (1.0, 1.0)),
        Segment(2, (1.0, 1.0), (-1.0, 1.0)),
        Segment(3, (-1.0, 1.0), (-1.0, -1.0)),
        Segment(4, (-0.25, 0.0), (0.25, 0.0)),
    ]


def collinear_chain(k: int, edge: float = 1.0) -> list[Segment]:
    """``k`` abutting collinear edges of equal length along the x axis."""
    return [Segment(i, (i * edge, 0.0), ((i + 1) * edge, 0.0)) for i in range(k)]


def spiral(turns: float, points_per_turn: int = 24, gap: float = 1.0) -> np.ndarray:
    """Vertices of an Archimedean spiral whose windings are ``gap`` apart."""
    n = max(2, int(round(turns * points_per_turn)) + 1)
    th = np.linspace(0.0, 2 * math.pi * turns, n)
    r = gap * (1.0 + th / (2 * math.pi))
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def polyline_segments(vertices, first_id: int = 0) -> list[Segment]:
    v = np.asarray(vertices, dtype=float)
    return [Segment(first_id + i, v[i], v[i + 1]) for i in range(len(v) - 1)]


FAMILIES = ("star", "clusters", "random")


def sandwich_instance(family: str, seed: int) -> list[Segment]:
    """The seeded instances used for the approximation-guarantee checks."""
    rng = np.random.default_rng(seed)
    if family == "star":
        return star(1 + seed % 40, rng)
    if family == "clusters":
        return separated_clusters(rng, int(rng.integers(2, 21)))
    if family == "random":
        return random_segments(rng, int(rng.integers(10, 121)), density=float(rng.uniform(0.1, 1.0)))
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def bench_instance(family: str, n: int, rng: np.random.Generator, k: int = 8) -> list[Segment]:
    """Benchmark inputs of ``n`` segments with bounded density.

    ``grid`` is :func:`unit_grid`; ``star`` places ``n / k`` separated stars
    of ``k`` segments; ``random`` is :func:`random_segments` at density 0.25.
    """
    if family == "grid":
        return unit_grid(n)
    if family == "star":
        out: list[Segment] = []
        side = max(1, math.ceil(math.sqrt(max(1, n // k))))
        c = 0
        while len(out) < n:
            center = (10.0 * (c % side), 10.0 * (c // side))
            out += star(min(k, n - len(out)), rng, center, first_id=len(out))
            c += 1
        return out
    if family == "random":
        return random_segments(rng, n)
    raise ValueError(f"unknown bench family {family!r}; expected grid, star or random")


def star_polygon(n: int, m: int, radius: float = 1.0) -> np.ndarray:
    """Closed star polygon ``{n/m}``: its ``n`` chords are all tangent to one
    inner circle, so the ball on that circle meets every edge."""
    if math.gcd(n, m) != 1:
        raise ValueError("n and m must be coprime")
    th = 2 * math.pi * (np.arange(n + 1) * m % n) / n
    return np.column_stack([radius * np.cos(th), radius * np.sin(th)])


def _random_walk(rng: np.random.Generator, steps: int) -> np.ndarray:
    heading = rng.uniform(0, 2 * math.pi)
    pts = [np.zeros(2)]
    for _ in range(steps):
        heading += rng.normal(0.0, 0.6)
        step = rng.uniform(0.5, 1.5)
        pts.append(pts[-1] + step * np.array([math.cos(heading), math.sin(heading)]))
    return np.array(pts)


def _lawnmower(passes: int, width: float, gap: float) -> np.ndarray:
    pts = []
    for i in range(passes):
        xs = (0.0, width) if i % 2 == 0 else (width, 0.0)
        pts += [(xs[0], i * gap), (xs[1], i * gap)]
    return np.array(pts)


def synthetic_curves(seed: int = 2024, count: int = 50) -> list[tuple[str, np.ndarray]]:
    """A mixed set of small curves: random walks, spirals, star polygons,
    back-and-forth sweeps, straight chains and regular polygons.

    Coordinates are rounded to six decimals so a CSV round trip is exact.
    """
    rng = np.random.default_rng(seed)
    kinds = ("walk", "spiral", "star", "sweep", "chain", "polygon")
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        if kind == "walk":
            v = _random_walk(rng, int(rng.integers(3, 40)))
        elif kind == "spiral":
            v = spiral(float(rng.uniform(1.0, 3.0)), int(rng.integers(10, 20)), gap=float(rng.uniform(0.3, 1.0)))
        elif kind == "star":
            n = int(rng.choice([5, 7, 9, 10, 11, 13]))
            m = int(rng.choice([k for k in range(2, (n + 1) // 2) if math.gcd(n, k) == 1]))
            v = star_polygon(n, m, float(rng.uniform(1.0, 5.0)))
        elif kind == "sweep":
            v = _lawnmower(int(rng.integers(2, 8)), float(rng.uniform(3.0, 8.0)), float(rng.uniform(0.3, 2.0)))
        elif kind == "chain":
            k = int(rng.integers(1, 12))
            v = np.column_stack([np.arange(k + 1, dtype=float), np.zeros(k + 1)])
        else:
            n = int(rng.integers(5, 30))
            th = 2 * math.pi * np.arange(n + 1) / n
            v = np.column_stack([np.cos(th), np.sin(th)]) * rng.uniform(1.0, 4.0)
        angle = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
        v = np.round(v @ rot.T + rng.uniform(-100, 100, 2), 6)
        out.append((f"{kind}-{i:02d}", v))
    return out
