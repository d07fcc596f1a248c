"""Trajectory ingestion and per-curve density statistics.

Input files are UTF-8 CSV with rows ``id,x,y`` (``csv_xy``) or ``id,t,x,y``
(``csv_txy``).  Each curve is processed on its own: its edges form one
segment set whose density is estimated independently of the other curves.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import InputFormatError
from .geometry import Point, Segment
from .naive import DensityEstimate, approx_density, oracle_witness
from .quadtree import DensityIndex

FORMATS = ("csv_xy", "csv_txy")
EARTH_RADIUS_M = 6_371_008.8
TABLE_COLUMNS = ("Dataset", "#Curves", "MaxCurveSize", "Max", "Median", "Median λ/n")


@dataclass(frozen=True)
class Trajectory:
    id: str
    vertices: tuple[Point, ...]
    source: str = ""

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError(f"trajectory {self.id!r} needs at least two vertices")

    @property
    def segment_count(self) -> int:
        return len(self.vertices) - 1

    def segments(self, first_id: int = 0) -> list[Segment]:
        v = self.vertices
        return [Segment(first_id + i, v[i], v[i + 1]) for i in range(len(v) - 1)]


@dataclass(frozen=True)
class SkippedCurve:
    id: str
    reason: str


@dataclass
class IngestReport:
    trajectories: list[Trajectory]
    skipped: list[SkippedCurve] = field(default_factory=list)
    rows: int = 0


def _collapse(points: list[Point]) -> list[Point]:
    out: list[Point] = []
    for p in points:
        # vertices too close for a representable edge count as duplicates
        if not out or (p.x - out[-1].x) ** 2 + (p.y - out[-1].y) ** 2 > 0.0:
            out.append(p)
    return out


def _number(text: str, line: int, path: str, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputFormatError(f"column {column}: {text!r} is not a number", line, path) from None
    if not math.isfinite(v):
        raise InputFormatError(f"column {column}: non-finite value {text!r}", line, path)
    return v


def parse_trajectories(stream: TextIO, format: str = "csv_xy", header: bool = False,
                       source: str = "<stream>", project: bool = False) -> IngestReport:
    """Parse an open text stream; see :func:`ingest_with_report`."""
    if format not in FORMATS:
        raise ValueError(f"unknown trajectory format {format!r}; expected one of {FORMATS}")
    timed = format == "csv_txy"
    width = 4 if timed else 3
    groups: dict[str, list[tuple[float, int, float, float]]] = {}
    rows = 0
    for line, rec in enumerate(csv.reader(stream), start=1):
        if header and line == 1:
            continue
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != width:
            raise InputFormatError(f"expected {width} fields, got {len(rec)}", line, source)
        cid = rec[0].strip()
        if not cid:
            raise InputFormatError("empty curve id", line, source)
        t = _number(rec[1], line, source, "t") if timed else 0.0
        x = _number(rec[-2], line, source, "x")
        y = _number(rec[-1], line, source, "y")
        groups.setdefault(cid, []).append((t, rows, x, y))
        rows += 1
    if project:
        groups = _project(groups)
    curves, skipped = [], []
    for cid, pts in groups.items():
        if timed:
            pts = sorted(pts, key=lambda p: (p[0], p[1]))
        verts = _collapse([Point(x, y) for _, _, x, y in pts])
        if len(verts) < 2:
            skipped.append(SkippedCurve(cid, "fewer than two distinct vertices"))
            warnings.warn(f"{source}: skipping curve {cid!r}: fewer than two distinct vertices", stacklevel=2)
            continue
        curves.append(Trajectory(cid, tuple(verts), source))
    return IngestReport(curves, skipped, rows)


def _project(groups):
    """Equirectangular projection of (lon, lat) degrees to metres, about the mean latitude."""
    lats = [p[3] for pts in groups.values() for p in pts]
    if not lats:
        return groups
    k = math.cos(math.radians(sum(lats) / len(lats)))
    f = math.radians(1.0) * EARTH_RADIUS_M
    return {cid: [(t, i, x * f * k, y * f) for t, i, x, y in pts] for cid, pts in groups.items()}


def ingest_with_report(path: str | Path, format: str = "csv_xy", header: bool = False,
                       project: bool = False) -> IngestReport:
    """Read trajectories grouped by id, in order of first appearance.

    Vertices keep file order (``csv_xy``) or timestamp order (``csv_txy``),
    consecutive duplicates are collapsed, and curves left with fewer than two
    vertices are skipped with a warning and listed in the report.  With
    ``project`` the x/y columns are read as longitude/latitude degrees and
    mapped to metres by an equirectangular projection, which is only
    approximate away from the mean latitude.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_trajectories(fh, format, header, str(path), project)


def ingest(path: str | Path, format: str = "csv_xy", header: bool = False,
           project: bool = False) -> list[Trajectory]:
    return ingest_with_report(path, format, header, project).trajectories


def sample_curves(curves: Sequence[Trajectory], k: int | None, seed: int = 0) -> list[Trajectory]:
    """At most ``k`` curves drawn without replacement, kept in input order."""
    curves = list(curves)
    if k is None or k >= len(curves):
        return curves
    pick = np.random.default_rng(seed).choice(len(curves), size=k, replace=False)
    return [curves[i] for i in sorted(pick.tolist())]


# -- estimation ---------------------------------------------------------------------


def curve_density(t: Trajectory, factor: int = 4) -> DensityEstimate:
    """Density estimate of one curve's edge set.

    ``factor`` 3 uses the quadtree, 4 the square-cell covers over the
    quadtree's candidate sets, 25 the quadratic 25-approximation and 1 the
    exact oracle.
    """
    segs = t.segments()
    if factor == 1:
        return oracle_witness(segs)
    if factor == 3:
        return DensityIndex.build(segs).estimate
    if factor == 4:
        return DensityIndex.build(segs).query_estimate(4)
    if factor == 25:
        return approx_density(segs, 25)
    raise ValueError(f"unsupported factor {factor!r}; expected 1, 3, 4 or 25")


@dataclass(frozen=True)
class CurveResult:
    id: str
    n: int
    lambda_hat: int


@dataclass
class DatasetStats:
    dataset_name: str
    curve_count: int
    max_curve_size: int
    max_lambda: int
    median_lambda: float
    median_lambda_over_n: float
    per_curve: list[CurveResult]
    factor: int = 4

    def table_row(self) -> dict:
        """The summary in the six columns of the published statistics table."""
        return dict(zip(TABLE_COLUMNS, (
            self.dataset_name, self.curve_count, self.max_curve_size, self.max_lambda,
            self.median_lambda, self.median_lambda_over_n,
        )))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_curve"] = [asdict(c) for c in self.per_curve]
        return d


def summarize(name: str, per_curve: Sequence[CurveResult], factor: int) -> DatasetStats:
    if not per_curve:
        raise ValueError("dataset_stats needs at least one curve")
    lam = [c.lambda_hat for c in per_curve]
    return DatasetStats(
        dataset_name=name,
        curve_count=len(per_curve),
        max_curve_size=max(c.n for c in per_curve),
        max_lambda=max(lam),
        median_lambda=float(statistics.median(lam)),
        median_lambda_over_n=float(statistics.median(c.lambda_hat / c.n for c in per_curve)),
        per_curve=list(per_curve),
        factor=factor,
    )


def dataset_stats(curves: Sequence[Trajectory], factor: int = 4, name: str = "dataset",
                  threads: int = 1) -> DatasetStats:
    """Per-curve estimates and the summary statistics over them.

    Curves are independent work items; with ``threads > 1`` they are spread
    over a thread pool and collected in input order.  ``n`` is the number of
    edges of a curve.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("dataset_stats needs at least one curve")

    def one(t: Trajectory) -> CurveResult:
        return CurveResult(t.id, t.segment_count, curve_density(t, factor).value)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, curves))
    else:
        results = [one(t) for t in curves]
    return summarize(name, results, factor)


@dataclass(frozen=True)
class Histogram:
    edges: tuple[float, ...]
    counts: tuple[int, ...]

    def rows(self) -> list[tuple[float, float, int]]:
        return [(self.edges[i], self.edges[i + 1], self.counts[i]) for i in range(len(self.counts))]


def histogram(stats: DatasetStats, bins: int = 10) -> Histogram:
    """Equal-width bins over the per-curve values.

    Bins are closed on the left and open on the right, except the last,
    which is closed.
    """
    if bins < 1:
        raise ValueError("bins must be at least 1")
    counts, edges = np.histogram([c.lambda_hat for c in stats.per_curve], bins=bins)
    return Histogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts))


# -- output ---------------------------------------------------------------------------


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def stats_table_csv(stats: Iterable[DatasetStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for s in stats:
        w.writerow([_fmt(v) for v in s.table_row().values()])
    return buf.getvalue()


def per_curve_csv(stats: DatasetStats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("id", "n", "lambda_hat", "lambda_over_n"))
    for c in stats.per_curve:
        w.writerow((c.id, c.n, c.lambda_hat, _fmt(c.lambda_hat / c.n)))
    return buf.getvalue()


def histogram_csv(h: Histogram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("bin_left", "bin_right", "count"))
    for lo, hi, c in h.rows():
        w.writerow((_fmt(lo), _fmt(hi), c))
    return buf.getvalue()


def stats_json(stats: DatasetStats) -> str:
    return json.dumps(stats.to_dict(), sort_keys=True, indent=2)


def write_trajectories_csv(curves: Iterable[tuple[str, np.ndarray]], stream: TextIO, header: bool = True) -> None:
    """Write ``(id, vertices)`` pairs in the ``csv_xy`` format."""
    w = csv.writer(stream, lineterminator="\n")
    if header:
        w.writerow(("id", "x", "y"))
    for cid, verts in curves:
        for x, y in np.asarray(verts, dtype=float):
            w.writerow((cid, repr(float(x)), repr(float(y))))
