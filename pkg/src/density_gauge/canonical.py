"""Dyadic machinery: unit-square normalisation, bit differences, separators,
canonical covers and the Z-order on canonical squares.

A canonical square ``(level, kx, ky)`` is the cell
``[kx/2^level, (kx+1)/2^level) x [ky/2^level, (ky+1)/2^level)``.  All of the
bit arithmetic is done on exact integers obtained from the binary expansion
of the inputs, so nothing here depends on floating rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple, Sequence

import numpy as np

from .errors import DomainError
from .geometry import AxisSquare, Ball, Point, Segment, qs_bounds

MAX_LEVEL = 53


@dataclass(frozen=True)
class UnitTransform:
    """``p -> p * scale + offset``."""

    scale: float
    dx: float
    dy: float

    def apply(self, p) -> Point:
        return Point(p[0] * self.scale + self.dx, p[1] * self.scale + self.dy)

    def invert(self, p) -> Point:
        return Point((p[0] - self.dx) / self.scale, (p[1] - self.dy) / self.scale)

    def apply_segment(self, s: Segment) -> Segment:
        return Segment(s.id, self.apply(s.a), self.apply(s.b))

    def apply_ball(self, ball: Ball) -> Ball:
        return Ball(self.apply(ball.center), ball.radius * self.scale)

    def invert_ball(self, ball: Ball) -> Ball:
        return Ball(self.invert(ball.center), ball.radius / self.scale)

    @classmethod
    def for_bounds(cls, bounds, margin: float = 0.05) -> "UnitTransform":
        """Map the box ``(x0, y0, x1, y1)`` into ``[margin, 1 - margin]^2``."""
        x0, y0, x1, y1 = bounds
        extent = max(x1 - x0, y1 - y0)
        if not extent > 0:
            raise ValueError("cannot normalise: all points coincide")
        if not 0 <= margin < 0.5:
            raise ValueError("margin must lie in [0, 0.5)")
        scale = (1 - 2 * margin) / extent
        return cls(scale, margin - x0 * scale, margin - y0 * scale)


def bounding_box(segments: Iterable[Segment]) -> tuple[float, float, float, float]:
    xs, ys = [], []
    for s in segments:
        xs += (s.a.x, s.b.x)
        ys += (s.a.y, s.b.y)
    if not xs:
        raise ValueError("cannot normalise an empty segment set")
    return (min(xs), min(ys), max(xs), max(ys))


def normalize(segments: Sequence[Segment], margin: float = 0.05) -> tuple[list[Segment], UnitTransform]:
    """Uniformly scale and translate so every endpoint lies in the unit square.

    A ``margin`` (default 0.05) is left on each side; pass ``margin=0`` for a
    tight fit.
    """
    tr = UnitTransform.for_bounds(bounding_box(segments), margin)
    out = [tr.apply_segment(s) for s in segments]
    return out, tr


# -- bit differences -------------------------------------------------------------


def _dyadic(v: float) -> tuple[int, int]:
    """Exact ``(numerator, exponent)`` with ``v == numerator / 2**exponent``."""
    p, q = v.as_integer_ratio()
    return p, q.bit_length() - 1


def first_differing_bit(pa: int, ea: int, pb: int, eb: int) -> int:
    """1-based index of the first fractional bit where ``pa/2^ea`` and ``pb/2^eb`` differ."""
    e = max(ea, eb)
    a = pa << (e - ea)
    b = pb << (e - eb)
    x = a ^ b
    if x == 0:
        raise ValueError("values are equal; no differing bit")
    return e - x.bit_length() + 1


def bit_delta(alpha: float, beta: float) -> int:
    """Index of the first binary digit after the point in which ``alpha`` and
    ``beta`` differ.  Both must lie in ``[0, 1)``.

    Works on the exact mantissa/exponent decomposition: align the two binary
    fractions, XOR, and read off the highest set bit.
    """
    for v in (alpha, beta):
        if not 0.0 <= v < 1.0:
            raise ValueError(f"bit_delta expects values in [0, 1), got {v!r}")
    if alpha == beta:
        raise ValueError("bit_delta of equal values is undefined")
    pa, ea = _dyadic(float(alpha))
    pb, eb = _dyadic(float(beta))
    return first_differing_bit(pa, ea, pb, eb)


# -- separators --------------------------------------------------------------------


class Separator(NamedTuple):
    axis: Literal["vertical", "horizontal"]
    k: int
    level: int

    @property
    def value(self) -> float:
        return self.k / (1 << self.level)

    @property
    def significance(self) -> int:
        return self.level


_BELOW_ONE = math.nextafter(1.0, 0.0)


def _as_separator(p: int, e: int) -> tuple[int, int] | None:
    """Reduce ``p/2^e`` to ``(k, level)`` with odd ``k``; None for 0 or 1."""
    if p == 0:
        return None
    tz = (p & -p).bit_length() - 1
    k, level = p >> tz, e - tz
    if level <= 0:
        return None
    return k, level


def most_significant_separator(lo: float, hi: float, axis: Literal["vertical", "horizontal"] = "vertical") -> Separator:
    """The dyadic line ``k/2^i`` (``k`` odd) of smallest ``i`` meeting ``[lo, hi]``.

    Candidates are ``lo``, ``hi`` and the value obtained by keeping the bits
    the two share and appending a one at the first differing position.
    """
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo!r}, {hi!r}]")
    hi_eff = min(hi, _BELOW_ONE)
    cands = []
    pa, ea = _dyadic(float(lo))
    pb, eb = _dyadic(float(hi_eff))
    for p, e in ((pa, ea), (pb, eb)):
        c = _as_separator(p, e)
        if c is not None:
            cands.append(c)
    if lo < hi_eff:
        i = first_differing_bit(pa, ea, pb, eb)
        e = max(ea, eb, i)
        prefix = (pa << (e - ea)) >> (e - i + 1)  # first i-1 bits of lo
        c = _as_separator((prefix << 1) | 1, i)
        if c is not None:
            cands.append(c)
    k, level = min(cands, key=lambda c: c[1])
    return Separator(axis, k, level)


# -- canonical squares ---------------------------------------------------------------


class CanonicalSquare(NamedTuple):
    level: int
    kx: int
    ky: int

    @property
    def side(self) -> float:
        return 1.0 / (1 << self.level)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        s = 1.0 / (1 << self.level)
        return (self.kx * s, self.ky * s, (self.kx + 1) * s, (self.ky + 1) * s)

    @property
    def center(self) -> Point:
        s = 1.0 / (1 << self.level)
        return Point((self.kx + 0.5) * s, (self.ky + 0.5) * s)

    def children(self) -> list["CanonicalSquare"]:
        """Bottom-left, bottom-right, top-left, top-right."""
        L, x, y = self.level + 1, 2 * self.kx, 2 * self.ky
        return [CanonicalSquare(L, x, y), CanonicalSquare(L, x + 1, y),
                CanonicalSquare(L, x, y + 1), CanonicalSquare(L, x + 1, y + 1)]

    def parent(self) -> "CanonicalSquare":
        if self.level == 0:
            raise ValueError("the unit square has no parent")
        return CanonicalSquare(self.level - 1, self.kx >> 1, self.ky >> 1)

    def contains(self, other: "CanonicalSquare") -> bool:
        d = other.level - self.level
        return d >= 0 and (other.kx >> d) == self.kx and (other.ky >> d) == self.ky


ROOT = CanonicalSquare(0, 0, 0)


def _level_for_side(max_side: float) -> int:
    """Smallest level whose cell side is at most ``max_side``."""
    if max_side >= 1.0:
        return 0
    _, e = math.frexp(max_side)  # max_side = m * 2**e, m in [0.5, 1)
    level = 1 - e
    if level > MAX_LEVEL:
        raise DomainError(
            f"canonical cover needs level {level} > {MAX_LEVEL}; "
            "input has near-duplicate coordinates at this scale"
        )
    return level


def _level_at_least(extent: float) -> int:
    """Largest level whose cell side is at least ``extent`` (level 0 if extent >= 1)."""
    if extent >= 1.0:
        return 0
    m, e = math.frexp(extent)
    return -(e - 1) if m == 0.5 else -e


def clip_to_unit(box) -> tuple[float, float, float, float]:
    x0, y0, x1, y1 = box
    return (max(x0, 0.0), max(y0, 0.0), min(x1, 1.0), min(y1, 1.0))


def canonical_cover(q, max_side: float) -> list[CanonicalSquare]:
    """Canonical squares of side at most ``max_side`` whose union covers ``q``.

    ``q`` is an :class:`AxisSquare` or a box ``(x0, y0, x1, y1)`` inside the
    unit square.  The most significant vertical and horizontal separators
    split ``q`` into up to four parts; each part is expanded to canonical
    squares anchored at the separator crossing, all of the side of the largest
    part, and these are subdivided down to side ``<= max_side`` keeping only
    cells that overlap ``q``.
    """
    box = q.bounds if isinstance(q, AxisSquare) else tuple(map(float, q))
    x0, y0, x1, y1 = box
    if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
        raise DomainError(f"region {box} is not inside the unit square; normalise first")
    target = _level_for_side(max_side)
    sx = most_significant_separator(x0, x1, "vertical")
    sy = most_significant_separator(y0, y1, "horizontal")
    X, Y = sx.value, sy.value
    parts_x = [(-1, X - x0), (1, x1 - X)]
    parts_y = [(-1, Y - y0), (1, y1 - Y)]
    largest = max(e for _, e in parts_x + parts_y)
    # The expanded squares must stay aligned with both separators.
    c = max(_level_at_least(largest), sx.level, sy.level)
    final = max(target, c)
    n_c = 1 << c
    Xc, Yc = sx.k << (c - sx.level), sy.k << (c - sy.level)  # crossing in level-c units
    kx_lo, kx_hi = math.floor(x0 * (1 << final)), math.ceil(x1 * (1 << final)) - 1
    ky_lo, ky_hi = math.floor(y0 * (1 << final)), math.ceil(y1 * (1 << final)) - 1
    shift = final - c
    out = []
    for dy, ey in parts_y:
        if ey <= 0:
            continue
        ny = max(1, math.ceil(ey * n_c))
        rows = range(Yc, Yc + ny) if dy > 0 else range(Yc - ny, Yc)
        for dx, ex in parts_x:
            if ex <= 0:
                continue
            nx = max(1, math.ceil(ex * n_c))
            cols = range(Xc, Xc + nx) if dx > 0 else range(Xc - nx, Xc)
            for by in rows:
                for bx in cols:
                    # descendants of (c, bx, by) at the final level overlapping q
                    lo_x = max(bx << shift, kx_lo)
                    hi_x = min(((bx + 1) << shift) - 1, kx_hi)
                    lo_y = max(by << shift, ky_lo)
                    hi_y = min(((by + 1) << shift) - 1, ky_hi)
                    for ky in range(lo_y, hi_y + 1):
                        for kx in range(lo_x, hi_x + 1):
                            out.append(CanonicalSquare(final, kx, ky))
    return out


class CoverRect(NamedTuple):
    """A canonical cover given as a block of same-level cells ``kx0..kx1 x ky0..ky1``."""

    level: int
    kx0: int
    kx1: int
    ky0: int
    ky1: int

    @property
    def count(self) -> int:
        return (self.kx1 - self.kx0 + 1) * (self.ky1 - self.ky0 + 1)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        side = 1.0 / (1 << self.level)
        return (self.kx0 * side, self.ky0 * side, (self.kx1 + 1) * side, (self.ky1 + 1) * side)

    def squares(self) -> list[CanonicalSquare]:
        return [CanonicalSquare(self.level, kx, ky)
                for ky in range(self.ky0, self.ky1 + 1) for kx in range(self.kx0, self.kx1 + 1)]


def cover_rect(q, max_side: float) -> CoverRect:
    """:func:`canonical_cover` in block form.

    Every cell produced by :func:`canonical_cover` has the same level and
    together they fill the block of cells overlapping ``q``.
    """
    cells = canonical_cover(q, max_side)
    kxs = [c.kx for c in cells]
    kys = [c.ky for c in cells]
    return CoverRect(cells[0].level, min(kxs), max(kxs), min(kys), max(kys))


def cover_rects(boxes: np.ndarray, max_sides: np.ndarray) -> tuple[np.ndarray, ...]:
    """Vectorised :func:`cover_rect` returning arrays ``(level, kx0, kx1, ky0, ky1)``.

    When both sides of a box span at least two target cells the separator
    alignment never forces a finer level, so the block follows from the target
    level alone.  Other rows fall back to the scalar construction.
    """
    boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)
    max_sides = np.asarray(max_sides, dtype=float).reshape(-1)
    x0, y0, x1, y1 = boxes.T
    bad = ~((0 <= x0) & (x0 < x1) & (x1 <= 1) & (0 <= y0) & (y0 < y1) & (y1 <= 1))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"region {tuple(boxes[i])} is not inside the unit square; normalise first")
    _, e = np.frexp(max_sides)
    level = np.where(max_sides >= 1.0, 0, 1 - e).astype(np.int64)
    if level.max(initial=0) > MAX_LEVEL:
        raise DomainError(f"canonical cover needs level > {MAX_LEVEL}; input has near-duplicate coordinates")
    scale = np.ldexp(1.0, level)
    kx0 = np.floor(x0 * scale).astype(np.int64)
    kx1 = np.ceil(x1 * scale).astype(np.int64) - 1
    ky0 = np.floor(y0 * scale).astype(np.int64)
    ky1 = np.ceil(y1 * scale).astype(np.int64) - 1
    side = 1.0 / scale
    slow = ((x1 - x0) < 2 * side) | ((y1 - y0) < 2 * side) | (level > 62)
    for i in np.flatnonzero(slow):
        r = cover_rect(tuple(boxes[i]), float(max_sides[i]))
        level[i], kx0[i], kx1[i], ky0[i], ky1[i] = r
    return level, kx0, kx1, ky0, ky1


def cover_qs(s: Segment) -> list[CanonicalSquare]:
    """Canonical cover of ``Q_s`` clipped to the unit square (``s`` normalised)."""
    return canonical_cover(clip_to_unit(qs_bounds(s)), s.length)


# -- Z-order -------------------------------------------------------------------------


def _differing_bit_or_inf(pa: int, ea: int, pb: int, eb: int) -> float:
    e = max(ea, eb)
    if pa << (e - ea) == pb << (e - eb):
        return math.inf
    return first_differing_bit(pa, ea, pb, eb)


def lca(a: CanonicalSquare, b: CanonicalSquare) -> CanonicalSquare:
    """Smallest canonical square containing both ``a`` and ``b``.

    Uses the first differing bit of the exact square centres, as in the
    constant-time LCA of dyadic cells.
    """
    if a.contains(b):
        return a
    if b.contains(a):
        return b
    # the centre coordinate of a is (2 kx + 1) / 2^(level + 1)
    ix = _differing_bit_or_inf(2 * a.kx + 1, a.level + 1, 2 * b.kx + 1, b.level + 1)
    iy = _differing_bit_or_inf(2 * a.ky + 1, a.level + 1, 2 * b.ky + 1, b.level + 1)
    level = int(min(ix, iy, a.level + 1, b.level + 1)) - 1
    return CanonicalSquare(level, a.kx >> (a.level - level), a.ky >> (a.level - level))


def _child_index(parent: CanonicalSquare, sq: CanonicalSquare) -> int:
    d = sq.level - parent.level - 1
    return (((sq.ky >> d) & 1) << 1) | ((sq.kx >> d) & 1)


def zorder_compare(a: CanonicalSquare, b: CanonicalSquare) -> int:
    """-1, 0 or 1 as ``a`` comes before, equals or follows ``b`` in Z-order.

    Z-order is the depth-first order of the quadtree visiting children
    bottom-left, bottom-right, top-left, top-right; ancestors come first.
    """
    if a == b:
        return 0
    if a.contains(b):
        return -1
    if b.contains(a):
        return 1
    c = lca(a, b)
    return -1 if _child_index(c, a) < _child_index(c, b) else 1


def _spread_table() -> list[int]:
    table = []
    for v in range(1 << 16):
        r = 0
        for i in range(16):
            r |= ((v >> i) & 1) << (2 * i)
        table.append(r)
    return table


_SPREAD = _spread_table()


def _spread(v: int) -> int:
    r = 0
    shift = 0
    while v:
        r |= _SPREAD[v & 0xFFFF] << shift
        v >>= 16
        shift += 32
    return r


def zorder_key(sq: CanonicalSquare) -> tuple[int, int]:
    """Sort key agreeing with :func:`zorder_compare`."""
    d = MAX_LEVEL - sq.level
    return (_spread(sq.kx << d) | (_spread(sq.ky << d) << 1), sq.level)


def square_from_point(x: float, y: float, level: int) -> CanonicalSquare:
    n = 1 << level
    return CanonicalSquare(level, min(int(x * n), n - 1), min(int(y * n), n - 1))


# -- vectorised keys for levels up to 31 ------------------------------------------------

ARRAY_DEPTH = 31


def _part1by1(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    for shift, mask in ((16, 0x0000FFFF0000FFFF), (8, 0x00FF00FF00FF00FF),
                        (4, 0x0F0F0F0F0F0F0F0F), (2, 0x3333333333333333), (1, 0x5555555555555555)):
        v = (v | (v << np.uint64(shift))) & np.uint64(mask)
    return v


def zorder_keys_array(level: np.ndarray, kx: np.ndarray, ky: np.ndarray) -> np.ndarray:
    """Interleaved keys at depth 31; sorting by ``(key, level)`` gives Z-order."""
    shift = (ARRAY_DEPTH - np.asarray(level, dtype=np.int64)).astype(np.uint64)
    x = np.asarray(kx, dtype=np.uint64) << shift
    y = np.asarray(ky, dtype=np.uint64) << shift
    return _part1by1(x) | (_part1by1(y) << np.uint64(1))


def lca_arrays(la, kxa, kya, lb, kxb, kyb) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Element-wise :func:`lca` for squares of level at most 31."""
    la = np.asarray(la, dtype=np.int64)
    lb = np.asarray(lb, dtype=np.int64)
    xa = np.asarray(kxa, dtype=np.int64) << (ARRAY_DEPTH - la)
    xb = np.asarray(kxb, dtype=np.int64) << (ARRAY_DEPTH - lb)
    ya = np.asarray(kya, dtype=np.int64) << (ARRAY_DEPTH - la)
    yb = np.asarray(kyb, dtype=np.int64) << (ARRAY_DEPTH - lb)
    diff = (xa ^ xb) | (ya ^ yb)
    # bit length is exact: values are below 2**31
    _, bits = np.frexp(diff.astype(np.float64))
    bits = np.where(diff == 0, 0, bits)
    level = np.minimum(np.minimum(la, lb), ARRAY_DEPTH - bits)
    return level, xa >> (ARRAY_DEPTH - level), ya >> (ARRAY_DEPTH - level)
