"""Compressed quadtree over canonical squares.

Every segment ``s`` is associated with the canonical cover of ``Q_s``.  Each
node keeps the segments crossing its square whose length is at least the
node's threshold (the length of its shortest associated segment), sorted by
decreasing length, so the candidates for ``s`` are a prefix of a few short
lists.  The index answers the 3-approximation in ``O(n log n + lambda n)``
and supports insertion while keeping the estimate current.

Everything inside the index lives in normalised coordinates.  Witness balls
are mapped back to input coordinates before they are reported.
"""

from __future__ import annotations

import math
import sys
from bisect import insort
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from sortedcontainers import SortedDict

from .canonical import (
    ARRAY_DEPTH,
    ROOT,
    CanonicalSquare,
    CoverRect,
    UnitTransform,
    bounding_box,
    clip_to_unit,
    cover_rect,
    cover_rects,
    lca,
    lca_arrays,
    zorder_key,
    zorder_keys_array,
)
from .covers import cover_centers
from .errors import DomainError
from .geometry import (
    DEFAULT_EPS,
    Ball,
    Point,
    Segment,
    ball_counts,
    point_segment_distances,
    qs_bounds,
    segment_intersects_ball,
    segment_intersects_box,
)
from .naive import DensityEstimate

_KEY_SHIFT = 2 * (53 - ARRAY_DEPTH)


def _len_ge(a: float, b: float, eps: float) -> bool:
    """``a >= b`` up to the relative tolerance used by every density predicate."""
    return a >= b - eps * max(a, b)


def _square_box(sq: CanonicalSquare) -> tuple[float, float, float, float]:
    side = 1.0 / (1 << sq.level)
    return (sq.kx * side, sq.ky * side, (sq.kx + 1) * side, (sq.ky + 1) * side)


def _child_slot(parent: CanonicalSquare, sq: CanonicalSquare) -> int:
    d = sq.level - parent.level - 1
    return (((sq.ky >> d) & 1) << 1) | ((sq.kx >> d) & 1)


class Node:
    """One square of the compressed quadtree.

    ``entries`` holds ``(-length, id)`` pairs so that plain sorting gives
    decreasing length with ties broken by id.  ``tau`` is the shortest
    associated length (infinite for pure branching nodes); ``min_tau`` and
    ``max_assoc`` aggregate ``tau`` and the longest associated length over the
    subtree.
    """

    __slots__ = ("square", "children", "parent", "assoc", "entries", "tau", "amax", "min_tau", "max_assoc")

    def __init__(self, square: CanonicalSquare, parent: "Node | None" = None):
        self.square = square
        self.children: list | None = None
        self.parent = parent
        self.assoc: list[int] = []
        self.entries: list[tuple[float, int]] = []
        self.tau = math.inf
        self.amax = 0.0
        self.min_tau = math.inf
        self.max_assoc = 0.0

    @property
    def intersecting_ids(self) -> list[int]:
        return [sid for _, sid in self.entries]

    def child_nodes(self) -> list["Node"]:
        return [c for c in self.children if c is not None] if self.children else []

    def __repr__(self):
        return f"Node({tuple(self.square)}, assoc={len(self.assoc)}, entries={len(self.entries)})"


class PreSquare(NamedTuple):
    square: CanonicalSquare
    associated: list[int]
    intersecting: list[int]


@dataclass
class _Cells:
    """Deduplicated cover cells in Z-order with their associated segment rows."""

    level: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    keys: list | np.ndarray
    group_start: np.ndarray  # into rows
    rows: np.ndarray  # segment rows sorted by cell
    cell_of_row: np.ndarray  # cell index of each row


def _cover_blocks(norm: Sequence[Segment]) -> tuple[np.ndarray, ...]:
    boxes = np.array([clip_to_unit(qs_bounds(s)) for s in norm], dtype=float).reshape(-1, 4)
    lengths = np.array([s.length for s in norm], dtype=float)
    return cover_rects(boxes, lengths)


def _expand_blocks(level, kx0, kx1, ky0, ky1) -> tuple[np.ndarray, ...]:
    w = kx1 - kx0 + 1
    counts = w * (ky1 - ky0 + 1)
    row = np.repeat(np.arange(len(level)), counts)
    start = np.concatenate([[0], np.cumsum(counts)[:-1]])
    local = np.arange(int(counts.sum())) - np.repeat(start, counts)
    return row, level[row], kx0[row] + local % w[row], ky0[row] + local // w[row]


def _sorted_cells(row, level, kx, ky) -> _Cells:
    """Sort (segment, cell) pairs into Z-order and group equal cells."""
    if level.max(initial=0) <= ARRAY_DEPTH:
        keys = zorder_keys_array(level, kx, ky)
        order = np.lexsort((row, level, keys))
        keys, level, kx, ky, row = keys[order], level[order], kx[order], ky[order], row[order]
        new = np.ones(len(keys), dtype=bool)
        new[1:] = (keys[1:] != keys[:-1]) | (level[1:] != level[:-1])
        ukeys = keys[new]
    else:
        pykeys = [zorder_key(CanonicalSquare(int(a), int(b), int(c))) for a, b, c in zip(level, kx, ky)]
        order = np.array(sorted(range(len(pykeys)), key=lambda i: (pykeys[i], int(row[i]))), dtype=np.int64)
        level, kx, ky, row = level[order], kx[order], ky[order], row[order]
        pykeys = [pykeys[i] for i in order]
        new = np.ones(len(pykeys), dtype=bool)
        new[1:] = [pykeys[i] != pykeys[i - 1] for i in range(1, len(pykeys))]
        ukeys = [k for k, f in zip(pykeys, new) if f]
    starts = np.flatnonzero(new)
    cell_id = np.cumsum(new) - 1
    return _Cells(level[new], kx[new], ky[new], ukeys, starts, row, cell_id)


def preprocess(norm: Sequence[Segment], with_intersecting: bool = True) -> list[PreSquare]:
    """Deduplicated cover squares of normalised segments in Z-order.

    Each square lists the segments whose ``Q_s`` cover produced it and, when
    ``with_intersecting`` is set, those of them that actually cross it, by
    decreasing length.
    """
    norm = list(norm)
    if not norm:
        return []
    row, level, kx, ky = _expand_blocks(*_cover_blocks(norm))
    cells = _sorted_cells(row, level, kx, ky)
    bounds = list(cells.group_start) + [len(cells.rows)]
    out = []
    for g in range(len(cells.level)):
        sq = CanonicalSquare(int(cells.level[g]), int(cells.kx[g]), int(cells.ky[g]))
        members = [norm[int(r)] for r in cells.rows[bounds[g]:bounds[g + 1]]]
        inter = []
        if with_intersecting:
            box = _square_box(sq)
            inter = [s.id for s in sorted(members, key=lambda s: (-s.length, s.id))
                     if segment_intersects_box(s.coords(), box)]
        out.append(PreSquare(sq, [s.id for s in members], inter))
    return out


class _Store:
    """Growable arrays of normalised endpoints and lengths."""

    def __init__(self, capacity: int = 16):
        self.arr = np.empty((capacity, 4))
        self.len = np.empty(capacity)
        self.n = 0
        self.row: dict[int, int] = {}

    def add(self, s: Segment) -> None:
        if self.n == len(self.len):
            self.arr = np.concatenate([self.arr, np.empty_like(self.arr)])
            self.len = np.concatenate([self.len, np.empty_like(self.len)])
        self.arr[self.n] = s.coords()
        self.len[self.n] = s.length
        self.row[s.id] = self.n
        self.n += 1

    def rows(self, ids: Iterable[int]) -> list[int]:
        return [self.row[i] for i in ids]


@dataclass
class IndexStats:
    segments: int
    nodes: int
    associated_nodes: int
    list_entries: int
    peak_square_count: int
    approx_bytes: int | None = None

    @property
    def bytes_per_segment(self) -> float | None:
        if self.approx_bytes is None or self.segments == 0:
            return None
        return self.approx_bytes / self.segments


class DensityIndex:
    """Compressed quadtree maintaining a 3-approximation of the density.

    Build one with :meth:`build` (static, from a whole set) or :meth:`empty`
    followed by :meth:`insert`.  The maintained value never decreases and
    stays within ``[ceil(lambda / 3), lambda]`` of the stored set.

    Readers (:meth:`query_estimate`, traversals) may share an index; an
    :meth:`insert` needs exclusive access.
    """

    def __init__(self, transform: UnitTransform | None, eps: float = DEFAULT_EPS, margin: float = 0.05):
        self.transform = transform
        self.eps = eps
        self.margin = margin
        self.root = Node(ROOT)
        self._nodes: dict[CanonicalSquare, Node] = {ROOT: self.root}
        self._zindex: SortedDict | None = None
        self._segments: dict[int, Segment] = {}
        self._norm: dict[int, Segment] = {}
        self._assoc: dict[int, list[Node]] = {}
        self._store = _Store()
        self._value = 0
        self._witness: Ball | None = None  # normalised coordinates
        self._witness_id: int | None = None
        self._squares_seen = 0
        self._zindex_seed: tuple | None = None

    # -- construction --------------------------------------------------------

    @classmethod
    def empty(cls, bounds=None, eps: float = DEFAULT_EPS, margin: float = 0.05) -> "DensityIndex":
        """An index accepting segments inside ``bounds = (x0, y0, x1, y1)``.

        Without bounds the domain is fixed by the first inserted segment.
        """
        tr = UnitTransform.for_bounds(bounds, margin) if bounds is not None else None
        return cls(tr, eps, margin)

    @classmethod
    def build(cls, segments: Sequence[Segment], eps: float = DEFAULT_EPS, margin: float = 0.05,
              bounds=None) -> "DensityIndex":
        """Static construction followed by one pass of :meth:`query_estimate`."""
        segments = list(segments)
        if not segments:
            return cls.empty(bounds, eps, margin)
        _check_ids(segments)
        box = bounding_box(segments)
        if bounds is not None:
            box = _union_box(box, bounds)
        idx = cls(UnitTransform.for_bounds(box, margin), eps, margin)
        idx._bulk_load(segments)
        est = idx._evaluate_all(3)
        idx._value, idx._witness, idx._witness_id = est
        return idx

    @classmethod
    def from_inserts(cls, segments: Sequence[Segment], eps: float = DEFAULT_EPS, margin: float = 0.05,
                     bounds=None) -> "DensityIndex":
        """Build by repeated insertion into an index spanning all segments."""
        segments = list(segments)
        if bounds is None and segments:
            bounds = bounding_box(segments)
        idx = cls.empty(bounds, eps, margin)
        for s in segments:
            idx.insert(s)
        return idx

    def _bulk_load(self, segments: list[Segment]) -> None:
        tr = self.transform
        norm = [tr.apply_segment(s) for s in segments]
        for s, sn in zip(segments, norm):
            self._segments[s.id] = s
            self._norm[s.id] = sn
            self._store.add(sn)
        row, level, kx, ky = _expand_blocks(*_cover_blocks(norm))
        self._squares_seen += len(row)
        cells = _sorted_cells(row, level, kx, ky)
        n_cells = len(cells.level)
        cell_nodes = [Node(CanonicalSquare(int(a), int(b), int(c)))
                      for a, b, c in zip(cells.level.tolist(), cells.kx.tolist(), cells.ky.tolist())]
        lengths = np.array([s.length for s in norm])
        sorted_len = lengths[cells.rows]
        tau = np.minimum.reduceat(sorted_len, cells.group_start) if n_cells else np.empty(0)
        amax = np.maximum.reduceat(sorted_len, cells.group_start) if n_cells else np.empty(0)
        bounds = list(cells.group_start.tolist()) + [len(cells.rows)]
        ids = [norm[r].id for r in cells.rows.tolist()]
        for g, node in enumerate(cell_nodes):
            node.assoc = ids[bounds[g]:bounds[g + 1]]
            node.tau = float(tau[g])
            node.amax = float(amax[g])
        per_seg: list[list[Node]] = [[] for _ in norm]
        for r, g in zip(cells.rows.tolist(), cells.cell_of_row.tolist()):
            per_seg[r].append(cell_nodes[g])
        for sn, nodes in zip(norm, per_seg):
            self._assoc[sn.id] = nodes
        self._link(cells, cell_nodes)
        self._push_down(norm)

    def _link(self, cells: _Cells, cell_nodes: list[Node]) -> None:
        """Add branching nodes and wire parents and children in one Z-order pass."""
        n = len(cell_nodes)
        array_keys = isinstance(cells.keys, np.ndarray)
        extra: list[tuple] = []
        if n > 1:
            if array_keys:
                lv, bx, by = lca_arrays(cells.level[:-1], cells.kx[:-1], cells.ky[:-1],
                                        cells.level[1:], cells.kx[1:], cells.ky[1:])
                extra = list(zip(lv.tolist(), bx.tolist(), by.tolist()))
            else:
                extra = [tuple(lca(a.square, b.square)) for a, b in zip(cell_nodes, cell_nodes[1:])]
        known = {node.square: node for node in cell_nodes}
        if ROOT in known:
            self.root = known[ROOT]
        known[ROOT] = self.root
        for t in set(extra):
            sq = CanonicalSquare(*t)
            if sq not in known:
                known[sq] = Node(sq)
        if array_keys and known:
            sqs = list(known)
            karr = zorder_keys_array(np.array([q.level for q in sqs]), np.array([q.kx for q in sqs]),
                                     np.array([q.ky for q in sqs]))
            order = np.lexsort((np.array([q.level for q in sqs]), karr))
            ordered = [known[sqs[i]] for i in order.tolist()]
            zkeys = [(int(karr[i]) << _KEY_SHIFT, sqs[i].level) for i in order.tolist()]
        else:
            ordered = sorted(known.values(), key=lambda v: zorder_key(v.square))
            zkeys = [zorder_key(v.square) for v in ordered]
        stack = [ordered[0]]
        for v in ordered[1:]:
            sq = v.square
            while True:
                top = stack[-1].square
                d = sq.level - top.level
                if d > 0 and (sq.kx >> d) == top.kx and (sq.ky >> d) == top.ky:
                    break
                stack.pop()
            parent = stack[-1]
            v.parent = parent
            if parent.children is None:
                parent.children = [None, None, None, None]
            parent.children[_child_slot(parent.square, sq)] = v
            stack.append(v)
        self._nodes = known
        self._zindex_seed = (zkeys, ordered)
        for v in reversed(ordered):
            self._refresh_aggregates(v)

    @staticmethod
    def _refresh_aggregates(v: Node) -> None:
        mt, ma = v.tau, v.amax
        if v.children:
            for c in v.children:
                if c is not None:
                    if c.min_tau < mt:
                        mt = c.min_tau
                    if c.max_assoc > ma:
                        ma = c.max_assoc
        v.min_tau, v.max_assoc = mt, ma

    def _push_down(self, norm: list[Segment]) -> None:
        """Distribute every segment, shortest first, into the lists of the
        nodes it crosses whose threshold it meets."""
        eps = self.eps
        root = self.root
        for s in sorted(norm, key=lambda s: (s.length, -s.id)):
            L = s.length
            key = (-L, s.id)
            ax, ay, bx, by = s.coords()
            sx0, sx1 = min(ax, bx), max(ax, bx)
            sy0, sy1 = min(ay, by), max(ay, by)
            coords = (ax, ay, bx, by)
            stack = [root]
            while stack:
                v = stack.pop()
                if v.min_tau > L and not _len_ge(L, v.min_tau, eps):
                    continue
                sq = v.square
                side = 1.0 / (1 << sq.level)
                x0, y0 = sq.kx * side, sq.ky * side
                if sx1 < x0 or sx0 > x0 + side or sy1 < y0 or sy0 > y0 + side:
                    continue
                if not segment_intersects_box(coords, (x0, y0, x0 + side, y0 + side)):
                    continue
                if v.tau <= L or _len_ge(L, v.tau, eps):
                    v.entries.append(key)
                if v.children:
                    stack.extend(c for c in v.children if c is not None)
        for v in self._nodes.values():
            if v.entries:
                v.entries.reverse()

    # -- queries ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._segments)

    def __contains__(self, seg_id: int) -> bool:
        return seg_id in self._segments

    def segments(self) -> list[Segment]:
        return list(self._segments.values())

    def nodes(self) -> Iterator[Node]:
        """All nodes in depth-first order, children bottom-left first."""
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            if v.children:
                stack.extend(c for c in reversed(v.children) if c is not None)

    def normalized(self, seg_id: int) -> Segment:
        return self._norm[seg_id]

    def associated_nodes(self, seg_id: int) -> list[Node]:
        return list(self._assoc[seg_id])

    def cover_region(self, seg_id: int) -> CoverRect:
        """The block of cells making up ``Q'_s`` for a stored segment."""
        sq = [v.square for v in self._assoc[seg_id]]
        return CoverRect(sq[0].level, min(q.kx for q in sq), max(q.kx for q in sq),
                         min(q.ky for q in sq), max(q.ky for q in sq))

    def candidate_ids(self, seg_id: int) -> list[int]:
        """``S'(s)``: stored segments at least as long as ``s`` crossing ``Q'_s``."""
        return self._gather(self._assoc[seg_id], self._norm[seg_id].length)

    def _gather(self, nodes: Iterable[Node], length: float) -> list[int]:
        eps = self.eps
        cut = length - eps * length
        seen: set[int] = set()
        out: list[int] = []
        for v in nodes:
            for negl, sid in v.entries:
                if -negl < cut and not _len_ge(-negl, length, eps):
                    break
                if sid not in seen:
                    seen.add(sid)
                    out.append(sid)
        return out

    def _count_balls(self, centers: np.ndarray, radius: float, ids: list[int]) -> np.ndarray:
        rows = self._store.rows(ids)
        return ball_counts(centers, radius, self._store.arr[rows], self._store.len[rows], self.eps)

    def _true_count(self, center, radius: float) -> int:
        st = self._store
        return int(ball_counts(np.asarray([center], dtype=float), radius, st.arr[:st.n], st.len[:st.n], self.eps)[0])

    def _evaluate_all(self, factor: int) -> tuple[int, Ball | None, int | None]:
        best, ball, sid = 0, None, None
        for seg_id in sorted(self._norm):
            s = self._norm[seg_id]
            ids = self._gather(self._assoc[seg_id], s.length)
            if len(ids) <= best:
                continue
            centers = cover_centers(s, factor)
            counts = self._count_balls(centers, s.length, ids)
            k = int(np.argmax(counts))
            if counts[k] > best:
                best = self._true_count(centers[k], s.length)
                ball, sid = Ball(Point(*centers[k]), s.length), seg_id
        return best, ball, sid

    def _report(self, value: int, ball: Ball | None, sid: int | None, factor: int) -> DensityEstimate:
        if ball is not None:
            ball = self.transform.invert_ball(ball)
        return DensityEstimate(value, factor, ball, sid)

    def query_estimate(self, factor: int = 3) -> DensityEstimate:
        """Re-run the approximation over the whole index.

        ``factor=3`` uses the triangle covers; ``factor=4`` the square-cell
        covers over the same candidate sets.
        """
        if factor not in (3, 4):
            raise ValueError("the index supports factors 3 and 4")
        if not self._norm:
            return DensityEstimate(0, factor)
        return self._report(*self._evaluate_all(factor), factor)

    @property
    def estimate(self) -> DensityEstimate:
        """The maintained 3-approximation."""
        if not self._norm:
            return DensityEstimate(0, 3)
        return self._report(self._value, self._witness, self._witness_id, 3)

    # -- insertion ---------------------------------------------------------------

    @property
    def bounds(self) -> tuple[float, float, float, float] | None:
        """Input-space box that maps onto the unit square."""
        if self.transform is None:
            return None
        a = self.transform.invert((0.0, 0.0))
        b = self.transform.invert((1.0, 1.0))
        return (a.x, a.y, b.x, b.y)

    def insert(self, seg: Segment) -> DensityEstimate:
        """Add one segment and return the updated estimate.

        Raises :class:`DomainError` (carrying the bounding box a rebuilt
        index would need) when an endpoint falls outside the domain.
        """
        if seg.id in self._segments:
            raise ValueError(f"segment id {seg.id} already stored")
        if self.transform is None:
            self.transform = UnitTransform.for_bounds(bounding_box([seg]), self.margin)
        sn = self.transform.apply_segment(seg)
        if not all(0.0 <= c <= 1.0 for c in sn.coords()):
            need = _union_box(bounding_box(self.segments() + [seg]), self.bounds)
            raise DomainError(
                f"segment {seg.id} lies outside the index domain {self.bounds}; "
                f"rebuild with bounds covering {need}",
                required_bounds=need,
            )
        eps = self.eps
        L = sn.length
        rect = cover_rect(clip_to_unit(qs_bounds(sn)), L)
        self._squares_seen += rect.count
        old = self._collect(rect.bounds, L)
        self._segments[seg.id] = seg
        self._norm[seg.id] = sn
        self._store.add(sn)
        pool = [self._norm[i] for i in old] + [sn]
        own: list[Node] = []
        for sq in rect.squares():
            v = self._nodes.get(sq) or self._add_node(sq)
            own.append(v)
            v.assoc.append(seg.id)
            box = _square_box(sq)
            if v.tau > L:
                v.tau = L
                v.entries = sorted((-t.length, t.id) for t in pool
                                   if _len_ge(t.length, L, eps) and segment_intersects_box(t.coords(), box))
            elif segment_intersects_box(sn.coords(), box):
                insort(v.entries, (-L, seg.id))
            v.amax = max(v.amax, L)
            self._bubble(v)
        self._assoc[seg.id] = own
        self._push_one(sn, {id(v) for v in own})
        self._reevaluate(sn)
        return self.estimate

    def _zmap(self) -> SortedDict:
        if self._zindex is None:
            seed = self._zindex_seed
            if seed is not None:
                self._zindex = SortedDict(zip(*seed))
                self._zindex_seed = None
            else:
                self._zindex = SortedDict((zorder_key(v.square), v) for v in self._nodes.values())
        return self._zindex

    def _register(self, v: Node) -> None:
        self._nodes[v.square] = v
        self._zmap()[zorder_key(v.square)] = v

    def _add_node(self, sq: CanonicalSquare) -> Node:
        """Insert a new square, splitting an edge with a branching node if needed."""
        zmap = self._zmap()
        i = zmap.bisect_left(zorder_key(sq))
        u = zmap.peekitem(i - 1)[1]
        while not u.square.contains(sq):
            u = u.parent
        node = Node(sq, u)
        if u.children is None:
            u.children = [None, None, None, None]
        slot = _child_slot(u.square, sq)
        w = u.children[slot]
        if w is None:
            u.children[slot] = node
        elif sq.contains(w.square):
            node.children = [None, None, None, None]
            node.children[_child_slot(sq, w.square)] = w
            w.parent = node
            u.children[slot] = node
            self._refresh_aggregates(node)
        else:
            b = Node(lca(sq, w.square), u)
            b.children = [None, None, None, None]
            b.children[_child_slot(b.square, w.square)] = w
            b.children[_child_slot(b.square, sq)] = node
            w.parent = b
            node.parent = b
            u.children[slot] = b
            self._refresh_aggregates(b)
            self._register(b)
        self._register(node)
        return node

    def _bubble(self, v: Node) -> None:
        self._refresh_aggregates(v)
        mt, ma = v.min_tau, v.max_assoc
        u = v.parent
        while u is not None and (mt < u.min_tau or ma > u.max_assoc):
            u.min_tau = min(u.min_tau, mt)
            u.max_assoc = max(u.max_assoc, ma)
            mt, ma = u.min_tau, u.max_assoc
            u = u.parent

    def _collect(self, rect, L: float) -> list[int]:
        """Stored segments of length at least ``L`` crossing the closed box ``rect``."""
        eps = self.eps
        rx0, ry0, rx1, ry1 = rect
        found: set[int] = set()
        out: list[int] = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v.max_assoc < L and not _len_ge(v.max_assoc, L, eps):
                continue
            x0, y0, x1, y1 = _square_box(v.square)
            if x1 < rx0 or x0 > rx1 or y1 < ry0 or y0 > ry1:
                continue
            for negl, sid in v.entries:
                if not _len_ge(-negl, L, eps):
                    break
                if sid not in found:
                    found.add(sid)
                    if segment_intersects_box(self._norm[sid].coords(), rect):
                        out.append(sid)
            if v.children:
                stack.extend(c for c in v.children if c is not None)
        return out

    def _push_one(self, sn: Segment, skip: set[int]) -> None:
        eps = self.eps
        L = sn.length
        key = (-L, sn.id)
        coords = sn.coords()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if not _len_ge(L, v.min_tau, eps):
                continue
            if not segment_intersects_box(coords, _square_box(v.square)):
                continue
            if id(v) not in skip and _len_ge(L, v.tau, eps):
                insort(v.entries, key)
            if v.children:
                stack.extend(c for c in v.children if c is not None)

    def _affected(self, sn: Segment) -> list[int]:
        """Stored segments no longer than ``sn`` whose cover region ``sn`` crosses."""
        eps = self.eps
        L = sn.length
        coords = sn.coords()
        found: set[int] = {sn.id}
        out: list[int] = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            if not _len_ge(L, v.min_tau, eps):
                continue
            if not segment_intersects_box(coords, _square_box(v.square)):
                continue
            for sid in v.assoc:
                if sid not in found and _len_ge(L, self._norm[sid].length, eps):
                    found.add(sid)
                    out.append(sid)
            if v.children:
                stack.extend(c for c in v.children if c is not None)
        return sorted(out)

    def _offer(self, centers: np.ndarray, radius: float, ids: list[int], seg_id: int) -> None:
        counts = self._count_balls(centers, radius, ids)
        k = int(np.argmax(counts))
        if counts[k] > self._value:
            self._value = self._true_count(centers[k], radius)
            self._witness = Ball(Point(*centers[k]), radius)
            self._witness_id = seg_id

    def _reevaluate(self, sn: Segment) -> None:
        """Evaluate the new segment's cover and every ball it can have touched."""
        eps = self.eps
        if self._witness is not None and segment_intersects_ball(sn, self._witness, eps):
            self._value += 1
        ids = self._gather(self._assoc[sn.id], sn.length)
        if len(ids) > self._value:
            self._offer(cover_centers(sn, 3), sn.length, ids, sn.id)
        coords = np.asarray(sn.coords())
        for aid in self._affected(sn):
            a = self._norm[aid]
            ids = self._gather(self._assoc[aid], a.length)
            if len(ids) <= self._value:
                continue
            centers = cover_centers(a, 3)
            d = point_segment_distances(centers, coords).ravel()
            centers = centers[d <= a.length + eps * max(a.length, sn.length)]
            if len(centers):
                self._offer(centers, a.length, ids, aid)

    # -- maintenance ---------------------------------------------------------------

    def rebuild(self, bounds=None) -> "DensityIndex":
        """A fresh static index over the stored segments, optionally over a larger
        domain.  The previous estimate is kept if it is higher."""
        new = DensityIndex.build(self.segments(), self.eps, self.margin, bounds=bounds)
        if self._witness is not None and self._value > new._value:
            new._value = self._value
            new._witness = new.transform.apply_ball(self.transform.invert_ball(self._witness))
            new._witness_id = self._witness_id
        return new

    def stats(self, measure_memory: bool = False) -> IndexStats:
        nodes = list(self._nodes.values())
        size = None
        if measure_memory:
            size = 0
            for v in nodes:
                size += sys.getsizeof(v) + sys.getsizeof(v.entries) + sys.getsizeof(v.assoc)
                size += 32 * len(v.entries)
                if v.children:
                    size += sys.getsizeof(v.children)
            size += sum(sys.getsizeof(x) for x in self._assoc.values())
            size += self._store.arr.nbytes + self._store.len.nbytes
        return IndexStats(
            segments=len(self._segments),
            nodes=len(nodes),
            associated_nodes=sum(1 for v in nodes if v.assoc),
            list_entries=sum(len(v.entries) for v in nodes),
            peak_square_count=self._squares_seen,
            approx_bytes=size,
        )

    def check_invariants(self) -> None:
        """Assert the structural and ordering invariants.  Meant for tests."""
        eps = self.eps
        seen = 0
        for v in self.nodes():
            seen += 1
            assert self._nodes.get(v.square) is v, "node missing from the square map"
            if v.entries:
                assert v.entries == sorted(v.entries), f"list out of order at {v.square}"
                assert len({sid for _, sid in v.entries}) == len(v.entries), "duplicate list entry"
                box = _square_box(v.square)
                for negl, sid in v.entries:
                    assert _len_ge(-negl, v.tau, eps), "entry shorter than the threshold"
                    assert segment_intersects_box(self._norm[sid].coords(), box), "entry misses square"
            if v.assoc:
                assert v.tau == min(self._norm[i].length for i in v.assoc)
            else:
                assert v.tau == math.inf and not v.entries
            for slot, c in enumerate(v.children or []):
                if c is None:
                    continue
                assert c.parent is v
                assert v.square.contains(c.square) and c.square != v.square
                assert _child_slot(v.square, c.square) == slot
            mt, ma = v.min_tau, v.max_assoc
            self._refresh_aggregates(v)
            assert (mt, ma) == (v.min_tau, v.max_assoc), "stale subtree aggregate"
            if v is not self.root and not v.assoc:
                assert len(v.child_nodes()) >= 2, "branching node with fewer than two children"
        assert seen == len(self._nodes), "unreachable nodes"


def _check_ids(segments: Sequence[Segment]) -> None:
    ids = [s.id for s in segments]
    if len(set(ids)) != len(ids):
        raise ValueError("segment ids must be unique")


def _union_box(a, b):
    if b is None:
        return tuple(a)
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))


def build(segments: Sequence[Segment], eps: float = DEFAULT_EPS) -> DensityIndex:
    return DensityIndex.build(segments, eps)


def query_estimate(idx: DensityIndex, factor: int = 3) -> DensityEstimate:
    return idx.query_estimate(factor)


def insert(idx: DensityIndex, s: Segment) -> DensityEstimate:
    return idx.insert(s)
