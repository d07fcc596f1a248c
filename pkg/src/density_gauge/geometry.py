"""Planar primitives and the density-sense intersection predicates.

A segment *intersects* a ball when it meets the closed ball and is at least as
long as the radius.  Every comparison is done with a relative tolerance
``eps`` scaled by the larger of the segment length and the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_EPS = 1e-9


class Point(NamedTuple):
    x: float
    y: float


def _finite_point(p) -> Point:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite coordinate in point {p!r}")
    return Point(x, y)


class Segment:
    """A directed segment ``a -> b`` with a stable integer id.

    Zero-length segments are rejected because every construction downstream
    is scaled by the segment length.
    """

    __slots__ = ("id", "a", "b", "length")

    def __init__(self, id: int, a, b):
        a = _finite_point(a)
        b = _finite_point(b)
        dx, dy = b.x - a.x, b.y - a.y
        # the squared length is a divisor downstream, so it must not underflow
        if dx * dx + dy * dy == 0.0:
            raise ValueError(f"segment {id} has zero length")
        length = math.hypot(dx, dy)
        object.__setattr__(self, "id", int(id))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "length", length)

    def __setattr__(self, name, value):
        raise AttributeError("Segment is immutable")

    def __repr__(self):
        return f"Segment({self.id}, {tuple(self.a)}, {tuple(self.b)})"

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return (self.id, self.a, self.b) == (other.id, other.a, other.b)

    def __hash__(self):
        return hash((self.id, self.a, self.b))

    @property
    def midpoint(self) -> Point:
        return Point((self.a.x + self.b.x) / 2, (self.a.y + self.b.y) / 2)

    def coords(self) -> tuple[float, float, float, float]:
        return (self.a.x, self.a.y, self.b.x, self.b.y)


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _finite_point(self.center))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Stadium:
    """All points within ``reach`` of the core segment."""

    core: Segment
    reach: float

    def contains(self, p) -> bool:
        return dist_point_segment(p, self.core) <= self.reach


@dataclass(frozen=True)
class AxisSquare:
    """Closed square ``[x, x + side] x [y, y + side]``."""

    min_corner: Point
    side: float

    def __post_init__(self):
        object.__setattr__(self, "min_corner", _finite_point(self.min_corner))
        if not self.side > 0:
            raise ValueError("square side must be positive")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        x, y = self.min_corner
        return (x, y, x + self.side, y + self.side)

    @property
    def center(self) -> Point:
        h = self.side / 2
        return Point(self.min_corner.x + h, self.min_corner.y + h)

    def contains(self, p) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1


def dist_point_segment(p, s: Segment) -> float:
    ax, ay, bx, by = s.coords()
    dx, dy = bx - ax, by - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def segment_intersects_ball(s: Segment, ball: Ball, eps: float = DEFAULT_EPS) -> bool:
    r = ball.radius
    tol = eps * max(s.length, r)
    if s.length < r - tol:
        return False
    return dist_point_segment(ball.center, s) <= r + tol


def count_intersecting(segments: Iterable[Segment], ball: Ball, eps: float = DEFAULT_EPS) -> int:
    return sum(1 for s in segments if segment_intersects_ball(s, ball, eps))


def build_stadium(s: Segment) -> Stadium:
    return Stadium(core=s, reach=2.0 * s.length)


def build_qs(s: Segment) -> AxisSquare:
    """The ``5|s|`` axis-aligned square centred on the midpoint of ``s``."""
    m = s.midpoint
    half = 2.5 * s.length
    return AxisSquare(Point(m.x - half, m.y - half), 5.0 * s.length)


def qs_bounds(s: Segment) -> tuple[float, float, float, float]:
    m = s.midpoint
    half = 2.5 * s.length
    return (m.x - half, m.y - half, m.x + half, m.y + half)


def segment_intersects_box(coords, box, tol: float = 0.0) -> bool:
    """Closed segment vs closed axis-aligned box, separating-axis test.

    ``coords`` is ``(ax, ay, bx, by)``; ``box`` is ``(x0, y0, x1, y1)``.  The
    box is grown by ``tol`` on every side.
    """
    ax, ay, bx, by = coords
    x0, y0, x1, y1 = box
    x0 -= tol
    y0 -= tol
    x1 += tol
    y1 += tol
    if (ax < x0 and bx < x0) or (ax > x1 and bx > x1):
        return False
    if (ay < y0 and by < y0) or (ay > y1 and by > y1):
        return False
    dx, dy = bx - ax, by - ay
    c0 = dx * (y0 - ay) - dy * (x0 - ax)
    c1 = dx * (y0 - ay) - dy * (x1 - ax)
    c2 = dx * (y1 - ay) - dy * (x0 - ax)
    c3 = dx * (y1 - ay) - dy * (x1 - ax)
    if c0 > 0 and c1 > 0 and c2 > 0 and c3 > 0:
        return False
    if c0 < 0 and c1 < 0 and c2 < 0 and c3 < 0:
        return False
    return True


# -- vectorised helpers -----------------------------------------------------


def segment_array(segments: Sequence[Segment]) -> tuple[np.ndarray, np.ndarray]:
    """``(n, 4)`` endpoint array and ``(n,)`` length array."""
    if not segments:
        return np.empty((0, 4)), np.empty(0)
    arr = np.array([s.coords() for s in segments], dtype=float)
    lengths = np.array([s.length for s in segments], dtype=float)
    return arr, lengths


def point_segment_distances(points: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Distances from each of ``M`` points to each of ``m`` segments, ``(M, m)``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    segs = np.asarray(segs, dtype=float).reshape(-1, 4)
    ax, ay = segs[:, 0], segs[:, 1]
    dx, dy = segs[:, 2] - ax, segs[:, 3] - ay
    dd = dx * dx + dy * dy
    px = points[:, 0:1] - ax
    py = points[:, 1:2] - ay
    t = np.clip((px * dx + py * dy) / dd, 0.0, 1.0)
    return np.hypot(px - t * dx, py - t * dy)


def ball_counts(
    centers: np.ndarray,
    radius: float,
    segs: np.ndarray,
    lengths: np.ndarray,
    eps: float = DEFAULT_EPS,
) -> np.ndarray:
    """Number of segments intersecting each ball of the given radius."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    if len(segs) == 0 or len(centers) == 0:
        return np.zeros(len(centers), dtype=int)
    tol = eps * np.maximum(lengths, radius)
    keep = lengths >= radius - tol
    segs, reach = np.asarray(segs)[keep], (radius + tol[keep])
    if len(segs) == 0:
        return np.zeros(len(centers), dtype=int)
    # segments along rows so the inner loops run over the many centres
    cx = np.ascontiguousarray(centers[:, 0])
    cy = np.ascontiguousarray(centers[:, 1])
    ax, ay = segs[:, 0:1], segs[:, 1:2]
    dx, dy = segs[:, 2:3] - ax, segs[:, 3:4] - ay
    px = cx - ax
    py = cy - ay
    t = (px * dx + py * dy) * (1.0 / (dx * dx + dy * dy))
    np.maximum(t, 0.0, out=t)
    np.minimum(t, 1.0, out=t)
    px -= t * dx
    py -= t * dy
    px *= px
    py *= py
    px += py
    return np.count_nonzero(px <= (reach * reach)[:, None], axis=0)


def segment_segment_distances(seg, segs: np.ndarray) -> np.ndarray:
    """Distance from one segment ``(ax, ay, bx, by)`` to each row of ``segs``."""
    seg = np.asarray(seg, dtype=float)
    segs = np.asarray(segs, dtype=float).reshape(-1, 4)
    if len(segs) == 0:
        return np.empty(0)
    ends = np.stack([segs[:, 0:2], segs[:, 2:4]], axis=1)  # (m, 2, 2)
    d_other = point_segment_distances(seg[[0, 1, 2, 3]].reshape(2, 2), segs).min(axis=0)
    d_self = point_segment_distances(ends.reshape(-1, 2), seg.reshape(1, 4)).reshape(-1, 2).min(axis=1)
    d = np.minimum(d_other, d_self)
    d[segments_cross(seg, segs)] = 0.0
    return d


def segments_cross(seg, segs: np.ndarray) -> np.ndarray:
    """Boolean mask: does ``seg`` properly or improperly cross each row of ``segs``."""
    ax, ay, bx, by = seg
    cx, cy, ex, ey = segs[:, 0], segs[:, 1], segs[:, 2], segs[:, 3]

    def orient(px, py, qx, qy, rx, ry):
        return (qx - px) * (ry - py) - (qy - py) * (rx - px)

    o1 = orient(ax, ay, bx, by, cx, cy)
    o2 = orient(ax, ay, bx, by, ex, ey)
    o3 = orient(cx, cy, ex, ey, ax, ay)
    o4 = orient(cx, cy, ex, ey, bx, by)
    return (o1 * o2 <= 0) & (o3 * o4 <= 0) & ~((o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0))
