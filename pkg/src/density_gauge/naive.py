"""Quadratic-time density approximations and the brute-force oracle.

``approx_density`` scans every segment ``s``, gathers the segments at least as
long as ``s`` that meet ``Q_s`` and counts them against one of the ball
covers.  ``oracle_density`` computes the density exactly (up to ``eps``) by
evaluating every vertex of the arrangement of stadiums around each segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .covers import cover_centers
from .errors import CapExceeded
from .geometry import (
    DEFAULT_EPS,
    Ball,
    Point,
    Segment,
    ball_counts,
    point_segment_distances,
    qs_bounds,
    segment_array,
    segment_intersects_box,
    segment_segment_distances,
)

FACTORS = (3, 4, 25)
ORACLE_CAP = 500


@dataclass(frozen=True)
class DensityEstimate:
    """An approximate (or, with ``factor == 1``, exact) density value.

    ``witness`` is a ball intersected by exactly ``value`` segments, and
    ``witness_segment_id`` is the segment whose cover produced it.
    """

    value: int
    factor: int
    witness: Ball | None = None
    witness_segment_id: int | None = None

    def lower_bound_ok(self, lam: int) -> bool:
        """Does ``value`` satisfy the factor guarantee for true density ``lam``?"""
        return -(-lam // self.factor) <= self.value <= lam

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = {"x": self.witness.center.x, "y": self.witness.center.y, "radius": self.witness.radius}
        return {
            "value": self.value,
            "factor": self.factor,
            "witness": w,
            "witness_segment_id": self.witness_segment_id,
        }


def check_factor(factor: int) -> int:
    if factor not in FACTORS:
        raise ValueError(f"unsupported approximation factor {factor!r}; expected one of {FACTORS}")
    return factor


def qs_candidates(s: Segment, segments: Sequence[Segment], eps: float = DEFAULT_EPS) -> list[int]:
    """Indices of segments at least as long as ``s`` (up to ``eps``) meeting ``Q_s``."""
    box = qs_bounds(s)
    L = s.length
    out = []
    for i, t in enumerate(segments):
        if t.length >= L - eps * max(t.length, L) and segment_intersects_box(t.coords(), box):
            out.append(i)
    return out


def approx_density(segments: Sequence[Segment], factor: int = 3, eps: float = DEFAULT_EPS) -> DensityEstimate:
    """An ``factor``-approximation of the density in quadratic time.

    Returns a value in ``[ceil(lambda / factor), lambda]``.  Segments are
    visited in input order and the first ball reaching the maximum is kept as
    the witness.  A segment whose candidate set cannot beat the current best is
    skipped.
    """
    check_factor(factor)
    segments = list(segments)
    if not segments:
        return DensityEstimate(0, factor)
    arr, lengths = segment_array(segments)
    best, best_ball, best_id = 0, None, None
    for s in segments:
        idx = qs_candidates(s, segments, eps)
        if len(idx) <= best:
            continue
        centers = cover_centers(s, factor)
        counts = ball_counts(centers, s.length, arr[idx], lengths[idx], eps)
        k = int(np.argmax(counts))
        if counts[k] > best:
            # the cover only counts S'; report the ball's count over all of S
            best = int(ball_counts(centers[k:k + 1], s.length, arr, lengths, eps)[0])
            best_ball = Ball(Point(*centers[k]), s.length)
            best_id = s.id
    return DensityEstimate(best, factor, best_ball, best_id)


# -- oracle ------------------------------------------------------------------------


def _circle_circle(c: np.ndarray, r: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(c), k=1)
    d = c[j] - c[i]
    dist = np.hypot(d[:, 0], d[:, 1])
    ri, rj = r[i], r[j]
    ok = (dist > 0) & (dist <= ri + rj) & (dist >= np.abs(ri - rj))
    d, dist, ri, rj, ci = d[ok], dist[ok], ri[ok], rj[ok], c[i][ok]
    e = d / dist[:, None]
    a = (ri * ri - rj * rj + dist * dist) / (2 * dist)
    h = np.sqrt(np.maximum(ri * ri - a * a, 0.0))
    base = ci + a[:, None] * e
    perp = np.column_stack([-e[:, 1], e[:, 0]])
    return np.concatenate([base + h[:, None] * perp, base - h[:, None] * perp])


def _line_line(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(p), k=1)
    det = u[i, 0] * u[j, 1] - u[i, 1] * u[j, 0]
    ok = np.abs(det) > 1e-12
    i, j, det = i[ok], j[ok], det[ok]
    w = p[j] - p[i]
    t = (w[:, 0] * u[j, 1] - w[:, 1] * u[j, 0]) / det
    return p[i] + t[:, None] * u[i]


def _circle_line(c: np.ndarray, r: np.ndarray, p: np.ndarray, u: np.ndarray) -> np.ndarray:
    ci = np.repeat(np.arange(len(c)), len(p))
    lj = np.tile(np.arange(len(p)), len(c))
    w = c[ci] - p[lj]
    proj = w[:, 0] * u[lj, 0] + w[:, 1] * u[lj, 1]
    foot = p[lj] + proj[:, None] * u[lj]
    off = c[ci] - foot
    h2 = r[ci] ** 2 - (off[:, 0] ** 2 + off[:, 1] ** 2)
    ok = h2 >= 0
    h = np.sqrt(h2[ok])[:, None]
    foot, uu = foot[ok], u[lj][ok]
    return np.concatenate([foot + h * uu, foot - h * uu])


def stadium_vertices(segs: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Pairwise boundary crossings of the stadiums ``{p : dist(p, seg_i) <= rho_i}``.

    Every arc is extended to a full circle and every straight side to a full
    line, so the result is a superset of the arrangement vertices.  The four
    arc/side junctions of each stadium are included as well.
    """
    a, b = segs[:, 0:2], segs[:, 2:4]
    d = b - a
    u = d / np.hypot(d[:, 0], d[:, 1])[:, None]
    n = np.column_stack([-u[:, 1], u[:, 0]])
    off = rho[:, None] * n
    circles = np.concatenate([a, b])
    radii = np.concatenate([rho, rho])
    line_p = np.concatenate([a + off, a - off])
    line_u = np.concatenate([u, u])
    junctions = np.concatenate([a + off, a - off, b + off, b - off])
    return np.concatenate([
        junctions,
        _circle_circle(circles, radii),
        _line_line(line_p, line_u),
        _circle_line(circles, radii, line_p, line_u),
    ])


def _segment_crossings(segs: np.ndarray) -> np.ndarray:
    if len(segs) < 2:
        return np.empty((0, 2))
    i, j = np.triu_indices(len(segs), k=1)
    p, r = segs[i, 0:2], segs[i, 2:4] - segs[i, 0:2]
    q, s = segs[j, 0:2], segs[j, 2:4] - segs[j, 0:2]
    den = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    ok = den != 0
    w = q - p
    t = np.where(ok, (w[:, 0] * s[:, 1] - w[:, 1] * s[:, 0]) / np.where(ok, den, 1.0), -1.0)
    u = np.where(ok, (w[:, 0] * r[:, 1] - w[:, 1] * r[:, 0]) / np.where(ok, den, 1.0), -1.0)
    hit = ok & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    return p[hit] + t[hit, None] * r[hit]


def _lattice(s: Segment, res: int) -> np.ndarray:
    x0, y0, x1, y1 = qs_bounds(s)
    gx, gy = np.meshgrid(np.linspace(x0, x1, res), np.linspace(y0, y1, res))
    return np.column_stack([gx.ravel(), gy.ravel()])


def _best_ball_for(s: Segment, arr: np.ndarray, lengths: np.ndarray, grid_resolution: int,
                   eps: float, chunk: int = 4096) -> tuple[int, np.ndarray | None]:
    """Largest count over balls of radius ``|s|`` touching ``s``, with a centre."""
    r = s.length
    tol = eps * np.maximum(lengths, r)
    near = segment_segment_distances(s.coords(), arr) <= 2 * r + tol
    admissible = near & (lengths >= r - tol)
    sub, sub_len = arr[admissible], lengths[admissible]
    rho = r + 0.5 * eps * np.maximum(sub_len, r)
    cands = np.concatenate([
        _lattice(s, grid_resolution),
        sub[:, 0:2], sub[:, 2:4], (sub[:, 0:2] + sub[:, 2:4]) / 2,
        _segment_crossings(sub),
        stadium_vertices(sub, rho),
    ])
    own = point_segment_distances(cands, np.asarray(s.coords())).ravel()
    cands = cands[own <= r + eps * r]
    best, where = 0, None
    for k in range(0, len(cands), chunk):
        part = cands[k:k + chunk]
        counts = ball_counts(part, r, sub, sub_len, eps)
        j = int(np.argmax(counts))
        if counts[j] > best:
            best, where = int(counts[j]), part[j]
    return best, where


def _oracle(segments, grid_resolution, cap, eps, lower_bound, upper_bound):
    segments = list(segments)
    if len(segments) > cap:
        raise CapExceeded(f"oracle refuses {len(segments)} segments (cap {cap}); use an approximation")
    if grid_resolution < 50:
        raise ValueError("grid_resolution must be at least 50")
    if not segments:
        return 0, None, None
    arr, lengths = segment_array(segments)
    # Neighbourhood sizes bound each segment's best count; visiting the
    # largest first lets the bound cut the scan short.
    pools = np.empty(len(segments), dtype=int)
    for i, s in enumerate(segments):
        r = s.length
        tol = eps * np.maximum(lengths, r)
        near = segment_segment_distances(s.coords(), arr) <= 2 * r + tol
        pools[i] = np.count_nonzero(near & (lengths >= r - tol))
    order = sorted(range(len(segments)), key=lambda i: (-pools[i], i))
    best, ball, sid = lower_bound, None, None
    for i in order:
        if pools[i] <= best:
            break
        s = segments[i]
        k, where = _best_ball_for(s, arr, lengths, grid_resolution, eps)
        if k > best:
            best, ball, sid = k, Ball(Point(*where), s.length), s.id
            if upper_bound is not None and best >= upper_bound:
                break
    return best, ball, sid


def oracle_density(
    segments: Sequence[Segment],
    grid_resolution: int = 64,
    cap: int = ORACLE_CAP,
    eps: float = DEFAULT_EPS,
    lower_bound: int = 0,
    upper_bound: int | None = None,
) -> int:
    """Exact density by brute force over candidate ball centres.

    For each segment ``s`` the candidates are a ``grid_resolution`` lattice
    over ``Q_s``, all endpoints, midpoints and pairwise crossings of nearby
    segments, and every pairwise crossing of the boundaries of their stadiums
    of radius ``|s|``.  The last group contains a point of maximum depth, so
    the result is exact up to ``eps``.

    ``lower_bound`` and ``upper_bound`` are optional known bounds on the
    answer used for pruning; the caller is responsible for their validity.
    Refuses inputs larger than ``cap`` with :class:`CapExceeded`.
    """
    value, _, _ = _oracle(segments, grid_resolution, cap, eps, lower_bound, upper_bound)
    return value


def oracle_witness(
    segments: Sequence[Segment],
    grid_resolution: int = 64,
    cap: int = ORACLE_CAP,
    eps: float = DEFAULT_EPS,
) -> DensityEstimate:
    """Like :func:`oracle_density`, also reporting an optimal ball."""
    value, ball, sid = _oracle(segments, grid_resolution, cap, eps, 0, None)
    return DensityEstimate(value, 1, ball, sid)


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def sandwich_holds(value: int, lam: int, factor: int) -> bool:
    return ceil_div(lam, factor) <= value <= lam


__all__ = [
    "DensityEstimate",
    "approx_density",
    "oracle_density",
    "oracle_witness",
    "qs_candidates",
    "stadium_vertices",
    "sandwich_holds",
    "ceil_div",
    "FACTORS",
    "ORACLE_CAP",
]
