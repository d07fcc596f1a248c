import math

import numpy as np
import pytest

from density_gauge.errors import CapExceeded
from density_gauge.families import (
    collinear_chain,
    figure_one,
    polyline_segments,
    random_segments,
    separated_clusters,
    star,
    star_polygon,
    unit_grid,
)
from density_gauge.geometry import Ball, Point, Segment, count_intersecting, segment_array, ball_counts
from density_gauge.naive import (
    approx_density,
    ceil_div,
    oracle_density,
    oracle_witness,
    qs_candidates,
    sandwich_holds,
)


def test_oracle_known_values():
    assert oracle_density(figure_one()) == 4
    assert oracle_density(unit_grid(16)) == 2
    assert [oracle_density(collinear_chain(k)) for k in (1, 2, 3, 4, 6)] == [1, 2, 3, 4, 4]
    assert oracle_density(polyline_segments(star_polygon(10, 3))) == 10
    assert oracle_density([]) == 0


@pytest.mark.parametrize("k", [1, 2, 5, 13, 30])
def test_oracle_on_stars(k):
    assert oracle_density(star(k, np.random.default_rng(k))) == k


def test_oracle_on_clusters_is_the_largest_star():
    segs = separated_clusters(np.random.default_rng(2), 9)
    # every segment passes through its cluster centre on the spacing-10 lattice
    sizes = {}
    for s in segs:
        key = (round(s.midpoint.x / 10), round(s.midpoint.y / 10))
        sizes[key] = sizes.get(key, 0) + 1
    assert len(sizes) == 9
    assert oracle_density(segs) == max(sizes.values())


def test_oracle_witness_is_an_actual_ball():
    segs = random_segments(np.random.default_rng(11), 60, density=0.8)
    w = oracle_witness(segs)
    assert w.factor == 1
    assert count_intersecting(segs, w.witness) == w.value == oracle_density(segs)


def test_oracle_dominates_random_balls():
    rng = np.random.default_rng(12)
    segs = random_segments(rng, 80, density=1.0)
    lam = oracle_density(segs)
    arr, lengths = segment_array(segs)
    for r in (0.2, 0.5, 1.0, 1.5):
        centers = rng.uniform(0, math.sqrt(80), (20000, 2))
        assert ball_counts(centers, r, arr, lengths).max() <= lam


def test_oracle_limits():
    segs = unit_grid(20)
    with pytest.raises(CapExceeded):
        oracle_density(segs, cap=10)
    with pytest.raises(ValueError):
        oracle_density(segs, grid_resolution=10)
    assert oracle_density(segs, upper_bound=2) == 2  # stops at the first ball reaching the bound
    assert oracle_density(segs, lower_bound=5) == 5


@pytest.mark.parametrize("factor", [3, 4, 25])
def test_approx_sandwich_and_witness(factor):
    rng = np.random.default_rng(factor)
    for _ in range(5):
        segs = random_segments(rng, 70, density=float(rng.uniform(0.3, 1.5)))
        lam = oracle_density(segs)
        est = approx_density(segs, factor)
        assert sandwich_holds(est.value, lam, factor)
        assert est.lower_bound_ok(lam)
        assert count_intersecting(segs, est.witness) == est.value


def test_approx_edge_cases():
    assert approx_density([], 3).value == 0
    with pytest.raises(ValueError):
        approx_density(unit_grid(4), 5)
    one = [Segment(0, (0, 0), (1, 0))]
    assert approx_density(one, 3).value == 1


def test_qs_candidates_filters_short_and_far():
    s = Segment(0, (0, 0), (1, 0))
    others = [s, Segment(1, (0, 1), (0.5, 1)), Segment(2, (0, 2), (2, 2)), Segment(3, (10, 10), (12, 10))]
    assert qs_candidates(s, others) == [0, 2]


def test_ceil_div_and_sandwich():
    assert ceil_div(10, 3) == 4 and ceil_div(9, 3) == 3 and ceil_div(0, 4) == 0
    assert sandwich_holds(4, 10, 3) and not sandwich_holds(3, 10, 3) and not sandwich_holds(11, 10, 3)


def test_estimate_to_dict():
    est = approx_density(figure_one(), 3)
    d = est.to_dict()
    assert d["value"] == est.value and d["factor"] == 3
    assert set(d["witness"]) == {"x", "y", "radius"}
    assert isinstance(est.witness, Ball) and isinstance(est.witness.center, Point)
