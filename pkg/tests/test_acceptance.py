"""Acceptance suite: one test per criterion, each recording a PASS/FAIL verdict.

The verdict lines are printed in the terminal summary by ``conftest.py``.
"""

import csv
import functools
import gc
import math
import statistics
import time
from importlib import resources

import numpy as np
import pytest
from oracles import BruteLists, summary_from_values

from density_gauge.canonical import (
    CanonicalSquare,
    bit_delta,
    bounding_box,
    canonical_cover,
    clip_to_unit,
    most_significant_separator,
    zorder_compare,
)
from density_gauge.covers import FAR_CORNER_DISTANCE, balls_for_triangle, triangular_grid
from density_gauge.families import FAMILIES, random_segments, sandwich_instance, unit_grid
from density_gauge.geometry import Segment, count_intersecting, qs_bounds, segment_array, segment_segment_distances
from density_gauge.naive import approx_density, oracle_density, sandwich_holds
from density_gauge.quadtree import DensityIndex
from density_gauge.trajectories import TABLE_COLUMNS, curve_density, dataset_stats, histogram, ingest

SEEDS = range(100)


# -- 1 ------------------------------------------------------------------------------


@pytest.mark.criterion(1)
def test_factor_sandwich(verdict):
    t0 = time.perf_counter()
    violations, checked, largest = [], 0, 0
    for family in FAMILIES:
        for seed in SEEDS:
            segs = sandwich_instance(family, seed)
            largest = max(largest, len(segs))
            lam = oracle_density(segs)
            if family == "star" and lam != len(segs):
                violations.append((family, seed, "oracle", lam))
            estimates = {
                "25": (approx_density(segs, 25), 25),
                "4": (approx_density(segs, 4), 4),
                "3-naive": (approx_density(segs, 3), 3),
                "3-fast": (DensityIndex.build(segs).estimate, 3),
            }
            for name, (est, f) in estimates.items():
                checked += 1
                if not sandwich_holds(est.value, lam, f):
                    violations.append((family, seed, name, est.value, lam))
    elapsed = time.perf_counter() - t0
    ok = not violations and elapsed < 120 and largest <= 300
    verdict(1, ok, f"{checked} estimates on {3 * len(SEEDS)} instances (n <= {largest}), "
                   f"{len(violations)} violations, {elapsed:.1f}s (limit 120s)")
    assert not violations, violations[:5]
    assert elapsed < 120
    assert largest <= 300


# -- 2 ------------------------------------------------------------------------------


@pytest.mark.criterion(2)
def test_triangle_cover_coverage(verdict):
    rng = np.random.default_rng(2)
    triangles = []
    for _ in range(4):
        a = rng.uniform(-10, 10, 2)
        th = rng.uniform(0, 2 * math.pi)
        s = Segment(0, a, a + rng.uniform(0.1, 5.0) * np.array([math.cos(th), math.sin(th)]))
        grid = triangular_grid(s)
        for orientation in ("up", "down"):
            pool = [T for T in grid if T.orientation == orientation]
            for i in rng.choice(len(pool), 3, replace=False):
                triangles.append((pool[i], s.length))
    n_points = 100_000
    uncovered, worst = 0, 0.0
    for T, r in triangles:
        centers = np.array([tuple(b.center) for b in balls_for_triangle(T, r)])
        base = rng.dirichlet(np.ones(3), n_points) @ T.vertices()
        rad = r * np.sqrt(rng.uniform(0, 1, n_points))
        ang = rng.uniform(0, 2 * math.pi, n_points)
        pts = base + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        d = np.min(np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2), axis=1)
        uncovered += int(np.count_nonzero(d > r))
        worst = max(worst, float(d.max() / r))
    orientations = {T.orientation for T, _ in triangles}
    const = math.cos(math.pi / 6) * (1 + 1 / (9 * math.sqrt(3)))
    const_ok = abs(const - 0.922) < 1e-3 and math.isclose(FAR_CORNER_DISTANCE, const)
    ok = uncovered == 0 and len(triangles) >= 20 and orientations == {"up", "down"} and const_ok
    verdict(2, ok, f"{len(triangles)} triangles x {n_points} points, {uncovered} uncovered "
                   f"(max distance {worst:.4f} r); constant {const:.6f} vs 0.922")
    assert uncovered == 0
    assert len(triangles) >= 20 and orientations == {"up", "down"}
    assert const_ok


# -- 3 ------------------------------------------------------------------------------


def _random_unit_segment(rng):
    while True:
        a = rng.uniform(0, 1, 2)
        L = math.exp(rng.uniform(math.log(1e-3), math.log(0.25)))
        th = rng.uniform(0, 2 * math.pi)
        b = a + L * np.array([math.cos(th), math.sin(th)])
        if np.all((0 <= b) & (b <= 1)):
            return Segment(0, a, b)


def _covered(points, cells):
    hit = np.zeros(len(points), dtype=bool)
    for level in {c.level for c in cells}:
        n = 1 << level
        mine = {(c.kx, c.ky) for c in cells if c.level == level}
        keys = np.array([kx * (n + 1) + ky for kx, ky in mine])
        idx = np.minimum(np.floor(points * n).astype(np.int64), n - 1)
        hit |= np.isin(idx[:, 0] * (n + 1) + idx[:, 1], keys)
    return hit


@pytest.mark.criterion(3)
def test_canonical_cover_of_qs(verdict):
    rng = np.random.default_rng(3)
    n_points = 100_000
    bad_cover = bad_side = bad_count = 0
    max_count = 0
    for _ in range(1000):
        s = _random_unit_segment(rng)
        box = clip_to_unit(qs_bounds(s))
        cells = canonical_cover(box, s.length)
        max_count = max(max_count, len(cells))
        bad_side += sum(c.side > s.length for c in cells)
        bad_count += len(cells) > 1024
        pts = np.column_stack([rng.uniform(box[0], box[2], n_points), rng.uniform(box[1], box[3], n_points)])
        bad_cover += int(np.count_nonzero(~_covered(pts, cells)))
    ok = bad_cover == 0 and bad_side == 0 and bad_count == 0
    verdict(3, ok, f"1000 segments x {n_points} points: {bad_cover} uncovered, "
                   f"{bad_side} oversized squares, max count {max_count} (limit 1024)")
    assert bad_cover == 0 and bad_side == 0 and bad_count == 0


# -- 4 ------------------------------------------------------------------------------


def _bit_loop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """First differing fractional digit, one doubling at a time."""
    a, b = a.copy(), b.copy()
    out = np.zeros(len(a), dtype=np.int64)
    live = np.arange(len(a))
    digit = 0
    while len(live):
        digit += 1
        a[live] *= 2.0
        b[live] *= 2.0
        da, db = a[live] >= 1.0, b[live] >= 1.0
        a[live] -= da
        b[live] -= db
        done = da != db
        out[live[done]] = digit
        live = live[~done]
    return out


def _bit_pairs(rng, n):
    """``n`` distinct pairs in [0, 1): uniform, close, dyadic and adjacent floats."""
    q = (n + n // 10) // 5
    a1 = rng.uniform(0, 1, 2 * q)
    b1 = rng.uniform(0, 1, 2 * q)
    a2 = rng.uniform(0, 0.5, q)
    b2 = a2 + np.ldexp(rng.uniform(0, 1, q), -rng.integers(1, 60, q))
    lev = rng.integers(1, 54, q)
    a3 = np.array([rng.integers(0, 1 << int(L)) / (1 << int(L)) for L in lev])
    b3 = np.array([rng.integers(0, 1 << int(L)) / (1 << int(L)) for L in rng.integers(1, 54, q)])
    a4 = np.concatenate([rng.uniform(0, 1, q - 1000), np.zeros(1000)])
    b4 = np.nextafter(a4, 1.0)
    a = np.concatenate([a1, a2, a3, a4])
    b = np.concatenate([b1, b2, b3, b4])
    keep = (a != b) & (b < 1.0) & (a < 1.0)
    a, b = a[keep], b[keep]
    pick = rng.permutation(len(a))[:n]
    return a[pick], b[pick]


def _separator_scan(lo, hi, max_level=20):
    for level in range(1, max_level + 1):
        step = 1 << level
        k = math.ceil(lo * step)
        if k % 2 == 0:
            k += 1
        if k / step <= hi:
            return k, level
    return None


def _intervals(rng, n):
    out = []
    for i in range(n):
        lo = rng.uniform(0, 1)
        if i % 4 == 0:
            L = int(rng.integers(1, 21))
            lo = int(rng.integers(0, 1 << L)) / (1 << L)
        width = math.exp(rng.uniform(math.log(2 ** -19), 0.0))
        hi = min(1.0, lo + width)
        if i % 4 == 1:
            L = int(rng.integers(1, 21))
            hi = max(math.ceil(hi * (1 << L)) / (1 << L), lo + 2 ** -19)
            hi = min(hi, 1.0)
        if lo >= hi:
            lo = hi - 2 ** -19
        out.append((lo, hi))
    return out


@pytest.mark.criterion(4)
def test_bit_delta_and_separators(verdict):
    rng = np.random.default_rng(4)
    a, b = _bit_pairs(rng, 1_000_000)
    want = _bit_loop(a, b)
    got = np.fromiter((bit_delta(x, y) for x, y in zip(a.tolist(), b.tolist())), dtype=np.int64, count=len(a))
    bit_bad = int(np.count_nonzero(got != want))
    sep_bad = 0
    intervals = _intervals(rng, 10_000)
    for lo, hi in intervals:
        sep = most_significant_separator(lo, hi)
        if _separator_scan(lo, hi) != (sep.k, sep.level):
            sep_bad += 1
    ok = bit_bad == 0 and sep_bad == 0 and len(a) == 1_000_000
    verdict(4, ok, f"bit_delta {bit_bad} mismatches on {len(a)} pairs; "
                   f"separator {sep_bad} mismatches on {len(intervals)} intervals")
    assert bit_bad == 0 and sep_bad == 0
    assert len(a) == 1_000_000


# -- 5 ------------------------------------------------------------------------------


def _random_square(rng, max_level=20):
    L = int(rng.integers(0, max_level + 1))
    return CanonicalSquare(L, int(rng.integers(0, 1 << L)), int(rng.integers(0, 1 << L)))


def _related(rng, sq):
    """A square near ``sq`` in the hierarchy: ancestor, descendant, sibling or unrelated."""
    kind = rng.integers(0, 4)
    if kind == 0 and sq.level > 0:
        if rng.integers(0, 8) == 0:
            return sq
        d = int(rng.integers(1, sq.level + 1))
        return CanonicalSquare(sq.level - d, sq.kx >> d, sq.ky >> d)
    if kind == 1:
        d = int(rng.integers(1, 5))
        return CanonicalSquare(sq.level + d, (sq.kx << d) + int(rng.integers(0, 1 << d)),
                               (sq.ky << d) + int(rng.integers(0, 1 << d)))
    if kind == 2 and sq.level > 0:
        p = sq.parent()
        return p.children()[int(rng.integers(0, 4))]
    return _random_square(rng)


def _dfs_order(squares):
    """Explicit pre-order walk of the quadtree spanned by ``squares``."""
    trie: dict = {}
    for sq in squares:
        node = trie
        for depth in range(1, sq.level + 1):
            shift = sq.level - depth
            child = (((sq.ky >> shift) & 1) << 1) | ((sq.kx >> shift) & 1)
            node = node.setdefault(child, {})
        node["here"] = sq
    out = []

    def walk(node):
        if "here" in node:
            out.append(node["here"])
        for child in (0, 1, 2, 3):  # bottom-left, bottom-right, top-left, top-right
            if child in node:
                walk(node[child])

    walk(trie)
    return out


@pytest.mark.criterion(5)
def test_zorder(verdict):
    rng = np.random.default_rng(5)
    squares = list({_random_square(rng) for _ in range(700)})
    while len(squares) < 1000:
        sq = _related(rng, squares[int(rng.integers(0, len(squares)))])
        if sq not in squares:
            squares.append(sq)
    order_ok = sorted(squares, key=functools.cmp_to_key(zorder_compare)) == _dfs_order(squares)

    prop_bad = 0
    for _ in range(100_000):
        a = _random_square(rng)
        b = _related(rng, a)
        c = _related(rng, b if rng.integers(0, 2) else a)
        for x, y in ((a, b), (b, c), (a, c)):
            cxy = zorder_compare(x, y)
            if cxy != -zorder_compare(y, x) or (cxy == 0) != (x == y):
                prop_bad += 1
            if x != y and x.contains(y) and cxy != -1:
                prop_bad += 1
        for x, y, z in ((a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)):
            if zorder_compare(x, y) < 0 and zorder_compare(y, z) < 0 and zorder_compare(x, z) >= 0:
                prop_bad += 1
        if zorder_compare(a, a) != 0:
            prop_bad += 1
    ok = order_ok and prop_bad == 0
    verdict(5, ok, f"DFS order {'matches' if order_ok else 'differs'} on {len(squares)} squares; "
                   f"{prop_bad} order-property violations on 100000 triples")
    assert order_ok
    assert prop_bad == 0


# -- 6 ------------------------------------------------------------------------------


def _list_instance(seed):
    rng = np.random.default_rng(600 + seed)
    n = int(rng.integers(50, 201))
    if seed % 5 == 0:
        # equal lengths exercise the tie order
        return random_segments(rng, n, density=float(rng.uniform(0.3, 2.0)), lengths=(1.0, 1.0))
    return random_segments(rng, n, density=float(rng.uniform(0.2, 2.0)))


@pytest.mark.criterion(6)
def test_push_down_lists(verdict):
    mismatches = nodes = 0
    for seed in range(50):
        segs = _list_instance(seed)
        assert len(segs) <= 200
        indexes = [DensityIndex.build(segs)]
        if seed < 10:
            indexes.append(DensityIndex.from_inserts(segs))
        for idx in indexes:
            brute = BruteLists(idx)
            for v in idx.nodes():
                if v.assoc:
                    nodes += 1
                    mismatches += v.entries != brute.expected(v)
    verdict(6, mismatches == 0, f"{mismatches} mismatching lists over {nodes} nodes, 50 seeds (n <= 200)")
    assert mismatches == 0


# -- 7 ------------------------------------------------------------------------------


def _prefix_densities(segs):
    """Exact density of every prefix.

    One more segment ``s`` raises the density by at most one, and a ball
    counting the new segment has radius at most ``|s|`` and meets ``s``, so
    every segment it meets lies within ``2|s|`` of ``s``.  The oracle over
    that neighbourhood decides whether the density grew.
    """
    arr, _ = segment_array(segs)
    lam, out = 0, []
    for k, s in enumerate(segs, start=1):
        near = segment_segment_distances(s.coords(), arr[:k]) <= 2 * s.length * (1 + 1e-9)
        sub = [segs[i] for i in np.flatnonzero(near)]
        lam = max(lam, oracle_density(sub, lower_bound=lam, upper_bound=lam + 1))
        out.append(lam)
    return out


@pytest.mark.criterion(7)
def test_streaming_insertion(verdict):
    violations, prefixes, spot_bad = [], 0, 0
    for family in FAMILIES:
        for seed in SEEDS:
            segs = sandwich_instance(family, seed)
            assert len(segs) <= 120
            lams = _prefix_densities(segs)
            if seed % 10 == 0:
                spot_bad += lams[-1] != oracle_density(segs)
            idx = DensityIndex.empty(bounding_box(segs))
            prev = 0
            for k, s in enumerate(segs):
                est = idx.insert(s)
                prefixes += 1
                if est.value < prev or not sandwich_holds(est.value, lams[k], 3):
                    violations.append((family, seed, k, est.value, lams[k]))
                if count_intersecting(segs[:k + 1], est.witness) < est.value:
                    violations.append((family, seed, k, "witness"))
                prev = est.value
    ok = not violations and spot_bad == 0
    verdict(7, ok, f"{prefixes} prefixes over {3 * len(SEEDS)} streams, {len(violations)} violations; "
                   f"full-oracle spot check {spot_bad} mismatches")
    assert not violations, violations[:5]
    assert spot_bad == 0


# -- 8 ------------------------------------------------------------------------------


def _build_seconds(segs):
    gc.collect()
    t0 = time.perf_counter()
    idx = DensityIndex.build(segs)
    elapsed = time.perf_counter() - t0
    value = idx.estimate.value
    del idx
    return elapsed, value


@pytest.mark.criterion(8)
def test_empirical_scaling(verdict):
    small, large = unit_grid(20_000), unit_grid(40_000)
    t_small = statistics.median(_build_seconds(small)[0] for _ in range(3))
    t_large = statistics.median(_build_seconds(large)[0] for _ in range(3))
    ratio = t_large / t_small

    mid = unit_grid(5000)
    fast, fast_value = _build_seconds(mid)
    gc.collect()
    t0 = time.perf_counter()
    naive_value = approx_density(mid, 3).value
    naive = time.perf_counter() - t0
    speedup = naive / fast
    ok = ratio <= 3.0 and speedup >= 5.0
    verdict(8, ok, f"grid 2e4 -> 4e4: {t_small:.1f}s -> {t_large:.1f}s, ratio {ratio:.2f} (limit 3.0); "
                   f"n=5000 naive {naive:.1f}s vs fast {fast:.1f}s, {speedup:.1f}x (need 5x)")
    assert ratio <= 3.0
    assert speedup >= 5.0
    assert sandwich_holds(fast_value, 2, 3) and sandwich_holds(naive_value, 2, 3)


# -- 9 ------------------------------------------------------------------------------


def _bundled(name):
    return resources.files("density_gauge") / "data" / name


@pytest.mark.criterion(9)
def test_bundled_dataset_pipeline(verdict):
    with resources.as_file(_bundled("synthetic_curves.csv")) as path:
        curves = ingest(path, header=True)
    with _bundled("synthetic_curves_lambda.csv").open(encoding="utf-8") as fh:
        frozen = {r["id"]: (int(r["n"]), int(r["lambda"])) for r in csv.DictReader(fh)}

    oracle = {t.id: (t.segment_count, curve_density(t, 1).value) for t in curves}
    oracle_ok = oracle == frozen and len(curves) == 50

    st = dataset_stats(curves, factor=1, name="synthetic")
    want = summary_from_values(list(frozen.values()))
    got = (st.max_curve_size, st.max_lambda, st.median_lambda, st.median_lambda_over_n)
    stats_ok = got == want and st.curve_count == 50

    row = st.table_row()
    schema_ok = tuple(row) == TABLE_COLUMNS and len(row) == 6
    h = histogram(st, bins=10)
    hist_ok = sum(h.counts) == st.curve_count

    approx = dataset_stats(curves, factor=4, name="synthetic")
    approx_ok = all(sandwich_holds(c.lambda_hat, frozen[c.id][1], 4) for c in approx.per_curve)
    approx_ok &= sum(histogram(approx, bins=7).counts) == 50

    ok = oracle_ok and stats_ok and schema_ok and hist_ok and approx_ok
    verdict(9, ok, f"oracle vs frozen {'equal' if oracle_ok else 'differ'}; stats {got} vs independent {want}; "
                   f"{len(row)} columns; histogram sum {sum(h.counts)}/{st.curve_count}; "
                   f"4-approx sandwich {'holds' if approx_ok else 'fails'}")
    assert oracle_ok
    assert stats_ok
    assert schema_ok and hist_ok
    assert approx_ok
