"""Approximate the low-density value of planar segment sets.

The density of a segment set is the largest number of segments meeting a
single ball among those at least as long as the ball's radius.  This package
computes 3-, 4- and 25-approximations of it, an exact brute-force value for
small inputs, a quadtree index that supports insertion, and per-curve
statistics over trajectory datasets.
"""

__version__ = "0.1.0"

from .canonical import (
    CanonicalSquare,
    Separator,
    UnitTransform,
    bit_delta,
    canonical_cover,
    lca,
    most_significant_separator,
    normalize,
    zorder_compare,
    zorder_key,
)
from .covers import BallCover, TriangleCell, balls_for_triangle, cover3, cover4, cover25, triangular_grid
from .errors import CapExceeded, DensityGaugeError, DomainError, InputFormatError
from .geometry import (
    AxisSquare,
    Ball,
    Point,
    Segment,
    Stadium,
    build_qs,
    build_stadium,
    count_intersecting,
    dist_point_segment,
    segment_intersects_ball,
)
from .naive import DensityEstimate, approx_density, oracle_density, oracle_witness
from .quadtree import DensityIndex, Node, preprocess
from .trajectories import DatasetStats, Trajectory, curve_density, dataset_stats, histogram, ingest

__all__ = [
    "AxisSquare", "Ball", "BallCover", "CanonicalSquare", "CapExceeded", "DatasetStats",
    "DensityEstimate", "DensityGaugeError", "DensityIndex", "DomainError", "InputFormatError",
    "Node", "Point", "Segment", "Separator", "Stadium", "Trajectory", "TriangleCell",
    "UnitTransform", "approx_density", "balls_for_triangle", "bit_delta", "build_qs",
    "build_stadium", "canonical_cover", "count_intersecting", "cover25", "cover3", "cover4",
    "curve_density", "dataset_stats", "dist_point_segment", "histogram", "ingest", "lca",
    "most_significant_separator", "normalize", "oracle_density", "oracle_witness", "preprocess",
    "segment_intersects_ball", "triangular_grid", "zorder_compare", "zorder_key",
]
