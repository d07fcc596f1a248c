"""Ball covers behind the 25-, 4- and 3-approximation factors.

Every cover is built for one segment ``s`` and consists of balls of radius
``|s|``.  The triangular and square-cell covers are laid out over a
``10|s| x 10|s|`` region centred on the midpoint of ``s``.

Geometry of the triangle cover (unit frame, ``|s| = 1``): the cells are
equilateral triangles of side ``1/9``.  For an up-pointing triangle with
centre ``c`` the three balls sit at distance ``1/2 + 1/(18 sqrt 3)`` from
``c`` in the directions of the three edge midpoints (down, upper-right,
upper-left); down-pointing triangles use the point reflection of those
offsets.  With this placement the farthest point of ``T (+) B0`` from its
nearest ball is ``cos(pi/6) (1 + 1/(9 sqrt 3)) ~ 0.922`` times the radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .geometry import Ball, Point, Segment

SQRT3 = math.sqrt(3.0)

TRIANGLE_SIDE = 1.0 / 9.0  # in units of |s|
REGION_SIDE = 10.0  # in units of |s|

# Ball offsets for an up-pointing, axis-aligned triangle, in units of |s|.
_OFF_X = SQRT3 / 4 + 1 / 36
_OFF_Y = 1 / 4 + 1 / (36 * SQRT3)
_OFF_DOWN = 1 / 2 + 1 / (18 * SQRT3)
UP_OFFSETS = np.array([(-_OFF_X, _OFF_Y), (0.0, -_OFF_DOWN), (_OFF_X, _OFF_Y)])

# Far corner of T (+) B0 seen from the nearest ball centre, in units of |s|.
FAR_CORNER_DISTANCE = math.cos(math.pi / 6) * (1 + 1 / (9 * SQRT3))

# Triangle circumradius plus |s|: optimal centres beyond this from s are useless.
TRIANGLE_REACH = 1.0 + TRIANGLE_SIDE / SQRT3
CELL_SIDE = 1.0 / 9.0
CELL_REACH = 1.0 + CELL_SIDE * math.sqrt(2) / 2


@dataclass(frozen=True)
class TriangleCell:
    center: Point
    side: float
    orientation: Literal["up", "down"]
    base_angle: float = 0.0

    def vertices(self) -> np.ndarray:
        """Three vertices, apex first."""
        R = self.side / SQRT3
        sign = 1.0 if self.orientation == "up" else -1.0
        local = sign * np.array([(0.0, R), (-self.side / 2, -R / 2), (self.side / 2, -R / 2)])
        return np.asarray(self.center) + _rotate(local, self.base_angle)


@dataclass(frozen=True)
class SquareCell:
    center: Point
    side: float


@dataclass(frozen=True)
class BallCover:
    balls: list
    factor: int
    source_segment_id: int


def _rotate(v: np.ndarray, angle: float) -> np.ndarray:
    if angle == 0.0:
        return v
    c, s = math.cos(angle), math.sin(angle)
    return v @ np.array([[c, s], [-s, c]])


# -- 25-cover ----------------------------------------------------------------


def cover25_centers(s: Segment) -> np.ndarray:
    m = s.midpoint
    L = s.length
    steps = np.arange(5) - 2.0
    gx, gy = np.meshgrid(m.x + steps * L, m.y + steps * L, indexing="xy")
    return np.column_stack([gx.ravel(), gy.ravel()])


def cover25(s: Segment) -> BallCover:
    """One ball of radius ``|s|`` on each cell centre of the 5x5 split of Q_s."""
    balls = [Ball(Point(x, y), s.length) for x, y in cover25_centers(s)]
    return BallCover(balls, 25, s.id)


# -- sheared triangular grid --------------------------------------------------


@lru_cache(maxsize=None)
def _triangle_template() -> tuple[np.ndarray, np.ndarray]:
    """Centres and up/down flags of the full grid in the unit frame.

    Rows of height ``h`` are stacked bottom to top; odd rows are shifted by
    half a side so that consecutive rows form one triangular lattice.  Within
    a row, cells are enumerated left to right as (up, down) pairs.
    """
    t = TRIANGLE_SIDE
    h = t * SQRT3 / 2
    rows = math.ceil(REGION_SIDE / h)
    cols = math.ceil(REGION_SIDE / t) + 2
    half = REGION_SIDE / 2
    j = np.arange(rows)[:, None]
    k = np.arange(cols)[None, :]
    y = -rows * h / 2 + j * h
    base = -half - 1.5 * t + (j % 2) * (t / 2) + k * t
    up = np.stack(np.broadcast_arrays(base + t / 2, y + h / 3), axis=-1)
    down = np.stack(np.broadcast_arrays(base + t, y + 2 * h / 3), axis=-1)
    centers = np.stack([up, down], axis=2).reshape(-1, 2)
    is_up = np.tile([True, False], rows * cols)
    centers.setflags(write=False)
    is_up.setflags(write=False)
    return centers, is_up


@lru_cache(maxsize=None)
def _triangle_disc() -> tuple[np.ndarray, np.ndarray]:
    """Template cells that can lie near a unit segment centred at the origin."""
    centers, is_up = _triangle_template()
    keep = np.hypot(centers[:, 0], centers[:, 1]) <= 0.5 + TRIANGLE_REACH + 1e-6
    return centers[keep], _triangle_balls(centers[keep], is_up[keep])


def _triangle_balls(centers: np.ndarray, is_up: np.ndarray) -> np.ndarray:
    """``(m, 3, 2)`` unit-frame ball centres; down triangles reflect the offsets."""
    sign = np.where(is_up, 1.0, -1.0)[:, None, None]
    return centers[:, None, :] + sign * UP_OFFSETS[None, :, :]


def triangular_grid(s: Segment) -> list[TriangleCell]:
    """All triangles of side ``|s|/9`` tiling the region around ``s``."""
    centers, is_up = _triangle_template()
    m = s.midpoint
    L = s.length
    world = centers * L + (m.x, m.y)
    side = L * TRIANGLE_SIDE
    return [
        TriangleCell(Point(x, y), side, "up" if u else "down")
        for (x, y), u in zip(world.tolist(), is_up.tolist())
    ]


def balls_for_triangle(T: TriangleCell, r: float) -> list[Ball]:
    sign = 1.0 if T.orientation == "up" else -1.0
    offsets = _rotate(sign * UP_OFFSETS * r, T.base_angle)
    c = np.asarray(T.center)
    return [Ball(Point(*(c + o)), r) for o in offsets]


def cover3(s: Segment) -> BallCover:
    """The full triangle cover: three balls per grid triangle."""
    centers = triangle_cover_centers(s, near=False)
    return BallCover([Ball(Point(x, y), s.length) for x, y in centers.tolist()], 3, s.id)


def _near_unit_segment(points: np.ndarray, s: Segment, reach: float) -> np.ndarray:
    """Mask of unit-frame points within ``reach`` of ``s`` mapped to the unit frame."""
    ux = (s.b.x - s.a.x) / s.length / 2
    uy = (s.b.y - s.a.y) / s.length / 2
    qx = points[:, 0] + ux
    qy = points[:, 1] + uy
    # |u| = 1/2, so the projection parameter along a -> b is 2 (q . u)
    t = qx * ux
    t += qy * uy
    t *= 2.0
    np.clip(t, 0.0, 1.0, out=t)
    t *= 2.0
    qx -= t * ux
    qy -= t * uy
    qx *= qx
    qy *= qy
    qx += qy
    return qx <= reach * reach


def triangle_cover_centers(s: Segment, near: bool = True) -> np.ndarray:
    """Ball centres of the triangle cover in construction order.

    With ``near=True`` only triangles whose centre lies within
    ``|s| (1 + 1/(9 sqrt 3))`` of ``s`` contribute.  Any radius-``|s|`` ball
    touching ``s`` is centred in one of those triangles, so dropping the rest
    never lowers the guaranteed count.
    """
    if near:
        centers, balls = _triangle_disc()
        balls = balls[_near_unit_segment(centers, s, TRIANGLE_REACH * (1 + 1e-9))]
    else:
        centers, is_up = _triangle_template()
        balls = _triangle_balls(centers, is_up)
    m = s.midpoint
    out = balls.reshape(-1, 2) * s.length
    out += (m.x, m.y)
    return out


# -- square cells for the 4-cover ----------------------------------------------


@lru_cache(maxsize=None)
def _square_template() -> np.ndarray:
    n = math.ceil(REGION_SIDE / CELL_SIDE)
    c = -REGION_SIDE / 2 + CELL_SIDE / 2 + np.arange(n) * CELL_SIDE
    gx, gy = np.meshgrid(c, c, indexing="xy")
    out = np.column_stack([gx.ravel(), gy.ravel()])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _square_disc() -> np.ndarray:
    centers = _square_template()
    return centers[np.hypot(centers[:, 0], centers[:, 1]) <= 0.5 + CELL_REACH + 1e-6]


# Corners pushed outward along the diagonal by the half-diagonal: (+-t, +-t).
SQUARE_OFFSETS = np.array([(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)]) * CELL_SIDE


def square_grid(s: Segment) -> list[SquareCell]:
    m = s.midpoint
    world = _square_template() * s.length + (m.x, m.y)
    side = s.length * CELL_SIDE
    return [SquareCell(Point(x, y), side) for x, y in world.tolist()]


def balls_for_square(cell: SquareCell, r: float) -> list[Ball]:
    c = np.asarray(cell.center)
    scale = cell.side / CELL_SIDE
    return [Ball(Point(*(c + o * scale)), r) for o in SQUARE_OFFSETS]


def square_cover_centers(s: Segment, near: bool = True) -> np.ndarray:
    if near:
        centers = _square_disc()
        centers = centers[_near_unit_segment(centers, s, CELL_REACH * (1 + 1e-9))]
    else:
        centers = _square_template()
    balls = centers[:, None, :] + SQUARE_OFFSETS[None, :, :]
    m = s.midpoint
    out = balls.reshape(-1, 2) * s.length
    out += (m.x, m.y)
    return out


def cover4(s: Segment) -> BallCover:
    """Four balls per square cell of side ``|s|/9`` over the region around ``s``."""
    centers = square_cover_centers(s, near=False)
    return BallCover([Ball(Point(x, y), s.length) for x, y in centers.tolist()], 4, s.id)


def cover_centers(s: Segment, factor: int, near: bool = True) -> np.ndarray:
    if factor == 3:
        return triangle_cover_centers(s, near)
    if factor == 4:
        return square_cover_centers(s, near)
    if factor == 25:
        return cover25_centers(s)
    raise ValueError(f"unsupported approximation factor {factor}; expected 3, 4 or 25")
