import math

import numpy as np
import pytest

from density_gauge.covers import (
    FAR_CORNER_DISTANCE,
    SQRT3,
    SquareCell,
    TriangleCell,
    _triangle_template,
    balls_for_square,
    balls_for_triangle,
    cover3,
    cover4,
    cover25,
    cover_centers,
    square_cover_centers,
    triangle_cover_centers,
    triangular_grid,
)
from density_gauge.geometry import Segment, dist_point_segment


def _sample_minkowski(vertices, r, n, rng):
    """Uniform points of a triangle plus uniform offsets in the radius-r disc."""
    base = rng.dirichlet(np.ones(3), n) @ vertices
    rad = r * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * math.pi, n)
    return base + np.column_stack([rad * np.cos(th), rad * np.sin(th)])


def _uncovered(points, centers, r):
    d = np.min(np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2), axis=1)
    return int(np.count_nonzero(d > r * (1 + 1e-12)))


def test_triangle_grid_size_and_cover_counts():
    s = Segment(0, (0, 0), (1, 0))
    grid = triangular_grid(s)
    assert len(grid) == 19136
    assert sum(t.orientation == "up" for t in grid) == len(grid) // 2
    assert len(cover3(s).balls) == 3 * len(grid)
    assert len(cover25(s).balls) == 25
    assert len(cover4(s).balls) == 4 * 90 * 90


@pytest.mark.parametrize("orientation", ["up", "down"])
@pytest.mark.parametrize("angle", [0.0, 0.7])
def test_three_balls_cover_minkowski_sum(orientation, angle):
    rng = np.random.default_rng(5)
    r = 2.0
    T = TriangleCell((1.0, -3.0), r / 9, orientation, angle)
    centers = np.array([tuple(b.center) for b in balls_for_triangle(T, r)])
    pts = _sample_minkowski(T.vertices(), r, 20000, rng)
    assert _uncovered(pts, centers, r) == 0


def test_far_corner_constant():
    assert abs(FAR_CORNER_DISTANCE - 0.922) < 1e-3
    assert math.isclose(FAR_CORNER_DISTANCE, math.cos(math.pi / 6) * (1 + 1 / (9 * SQRT3)))


def test_four_balls_cover_square_cell_sum():
    rng = np.random.default_rng(6)
    r = 1.5
    cell = SquareCell((0.3, 0.4), r / 9)
    centers = np.array([tuple(b.center) for b in balls_for_square(cell, r)])
    h = cell.side / 2
    base = np.asarray(cell.center) + rng.uniform(-h, h, (20000, 2))
    rad = r * np.sqrt(rng.uniform(0, 1, 20000))
    th = rng.uniform(0, 2 * math.pi, 20000)
    pts = base + np.column_stack([rad * np.cos(th), rad * np.sin(th)])
    assert _uncovered(pts, centers, r) == 0


def _containing_triangle(c, s):
    """Index into the template of a triangle containing the world point ``c``."""
    centers, is_up = _triangle_template()
    m = np.asarray(s.midpoint)
    q = (np.asarray(c) - m) / s.length - centers
    normals = np.array([(0.0, -1.0), (SQRT3 / 2, 0.5), (-SQRT3 / 2, 0.5)])
    sign = np.where(is_up, 1.0, -1.0)[:, None]
    proj = (q @ normals.T) * sign
    inside = np.all(proj <= (1 / 9) / (2 * SQRT3) + 1e-12, axis=1)
    return int(np.flatnonzero(inside)[0])


def test_near_pruning_keeps_every_triangle_that_can_hold_an_optimal_centre():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.uniform(-5, 5, 2)
        u = rng.uniform(0, 2 * math.pi)
        s = Segment(0, a, a + rng.uniform(0.3, 3) * np.array([math.cos(u), math.sin(u)]))
        full = triangle_cover_centers(s, near=False).reshape(-1, 3, 2)
        near = {tuple(np.round(p, 9)) for p in triangle_cover_centers(s, near=True)}
        for _ in range(50):
            # a centre at distance at most |s| from s
            p = s.a + rng.uniform(0, 1) * (np.asarray(s.b) - np.asarray(s.a))
            th = rng.uniform(0, 2 * math.pi)
            c = p + s.length * rng.uniform(0, 1) * np.array([math.cos(th), math.sin(th)])
            assert dist_point_segment(c, s) <= s.length + 1e-9
            tri = full[_containing_triangle(c, s)]
            assert all(tuple(np.round(b, 9)) in near for b in tri)


def test_square_near_cover_is_a_subset_of_the_full_cover():
    s = Segment(0, (2, 1), (3, 3))
    full = {tuple(np.round(p, 9)) for p in square_cover_centers(s, near=False)}
    near = square_cover_centers(s, near=True)
    assert 0 < len(near) < len(full)
    assert all(tuple(np.round(p, 9)) in full for p in near)


def test_cover_centers_dispatch():
    s = Segment(0, (0, 0), (0, 2))
    assert cover_centers(s, 25).shape == (25, 2)
    assert np.allclose(cover_centers(s, 25).mean(axis=0), (0, 1))
    with pytest.raises(ValueError):
        cover_centers(s, 5)
