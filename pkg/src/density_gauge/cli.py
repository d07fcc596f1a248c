"""Command-line interface: ``density-gauge {estimate,insert-sim,stats,bench}``.

Exit codes: 0 success, 2 usage error, 3 unreadable or malformed input,
4 refused work (out-of-domain insert without renormalisation, oracle cap).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .canonical import bounding_box
from .errors import CapExceeded, DomainError, InputFormatError
from .families import bench_instance
from .formats import read_segments
from .geometry import Segment
from .naive import DensityEstimate, approx_density, oracle_witness
from .quadtree import DensityIndex
from .trajectories import (
    dataset_stats,
    histogram,
    histogram_csv,
    ingest_with_report,
    per_curve_csv,
    sample_curves,
    stats_json,
    stats_table_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_REFUSED = 0, 2, 3, 4
THREADS_ENV = "DENSITY_GAUGE_THREADS"
ALGOS = ("oracle", "approx25", "approx3", "approx3-fast", "approx4")


@dataclass
class RunReport:
    command: str
    input_summary: dict
    estimate: DensityEstimate | None = None
    wall_time_ms: float | None = None
    peak_square_count: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self, deterministic: bool = False) -> str:
        d = {
            "command": self.command,
            "input_summary": self.input_summary,
            "estimate": self.estimate.to_dict() if self.estimate is not None else None,
            "wall_time_ms": None if deterministic else self.wall_time_ms,
            "peak_square_count": self.peak_square_count,
            "seed": self.seed,
        }
        d.update(self.extra)
        return json.dumps(d, sort_keys=True)


def resolve_threads(flag: int | None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise SystemExit(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        return max(1, n)
    if flag is not None:
        return max(1, flag)
    return os.cpu_count() or 1


def _load_segments(args) -> tuple[list[Segment], dict]:
    if args.format == "segments":
        segs = read_segments(args.input, header=args.header)
        return segs, {"segments": len(segs)}
    rep = ingest_with_report(args.input, args.traj_format, header=args.header, project=args.project)
    segs: list[Segment] = []
    for t in rep.trajectories:
        segs += t.segments(first_id=len(segs))
    return segs, {"segments": len(segs), "curves": len(rep.trajectories), "skipped_curves": len(rep.skipped)}


def _run_algo(algo: str, segs: list[Segment]) -> tuple[DensityEstimate, int | None]:
    if algo == "oracle":
        return oracle_witness(segs), None
    if algo == "approx25":
        return approx_density(segs, 25), None
    if algo == "approx3":
        return approx_density(segs, 3), None
    if algo == "approx4":
        return approx_density(segs, 4), None
    idx = DensityIndex.build(segs)
    return idx.estimate, idx.stats().peak_square_count


def cmd_estimate(args) -> int:
    segs, summary = _load_segments(args)
    t0 = time.perf_counter()
    est, squares = _run_algo(args.algo, segs)
    ms = (time.perf_counter() - t0) * 1e3
    report = RunReport("estimate", summary, est, round(ms, 3), squares, extra={"algo": args.algo})
    print(report.to_json(args.deterministic))
    return EXIT_OK


def _parse_order(text: str) -> int | None:
    if text == "file":
        return None
    if text.startswith("shuffled:"):
        try:
            return int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"order must be 'file' or 'shuffled:SEED', got {text!r}")


def _parse_box(text: str) -> tuple[float, float, float, float]:
    try:
        x0, y0, x1, y1 = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x0,y0,x1,y1, got {text!r}") from None
    if x1 < x0 or y1 < y0 or (x1, y1) == (x0, y0):
        raise argparse.ArgumentTypeError("domain box needs x0 <= x1, y0 <= y1 and a positive extent")
    return (x0, y0, x1, y1)


def cmd_insert_sim(args) -> int:
    segs, summary = _load_segments(args)
    if args.order is not None:
        perm = np.random.default_rng(args.order).permutation(len(segs))
        segs = [segs[i] for i in perm]
    bounds = args.domain if args.domain is not None else (bounding_box(segs) if segs else None)
    idx = DensityIndex.empty(bounds)
    out = sys.stdout
    rejected = rebuilds = 0
    t0 = time.perf_counter()
    for i, s in enumerate(segs):
        try:
            est = idx.insert(s)
        except DomainError as e:
            if not args.auto_renormalize:
                rejected += 1
                print(f"segment {s.id}: {e}", file=sys.stderr)
                continue
            idx = idx.rebuild(bounds=e.required_bounds)
            rebuilds += 1
            est = idx.insert(s)
        if args.deterministic:
            out.write(f"{i},{est.value}\n")
        else:
            out.write(f"{i},{est.value},{(time.perf_counter() - t0) * 1e3:.3f}\n")
    ms = (time.perf_counter() - t0) * 1e3
    summary = dict(summary, rejected=rejected, rebuilds=rebuilds)
    report = RunReport("insert-sim", summary, idx.estimate, round(ms, 3), idx.stats().peak_square_count,
                       seed=args.order, extra={"order": args.order_text})
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(args.deterministic) + "\n")
    if rejected and not args.auto_renormalize:
        return EXIT_REFUSED
    return EXIT_OK


def cmd_stats(args) -> int:
    rep = ingest_with_report(args.input, args.traj_format, header=args.header, project=args.project)
    curves = sample_curves(rep.trajectories, args.max_curves, args.seed)
    if not curves:
        print("no usable curves in input", file=sys.stderr)
        return EXIT_INPUT
    name = args.name or os.path.splitext(os.path.basename(args.input))[0]
    stats = dataset_stats(curves, args.factor, name, threads=resolve_threads(args.threads))
    if args.output_format == "json":
        print(stats_json(stats))
    else:
        sys.stdout.write(stats_table_csv([stats]))
    if args.per_curve:
        with open(args.per_curve, "w", encoding="utf-8", newline="") as fh:
            fh.write(per_curve_csv(stats))
    if args.histogram:
        with open(args.histogram, "w", encoding="utf-8", newline="") as fh:
            fh.write(histogram_csv(histogram(stats, args.bins)))
    if rep.skipped:
        print(f"skipped {len(rep.skipped)} curve(s): " + ", ".join(c.id for c in rep.skipped), file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    cols = ["family", "n", "k", "wall_ms", "estimate", "nodes", "squares", "list_entries",
            "bytes_per_segment", "max_candidates", "mean_candidates"]
    if args.compare_naive:
        cols += ["naive_ms", "speedup"]
    print(",".join(cols))
    for n in args.sizes:
        segs = bench_instance(args.family, n, rng, k=args.k)
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            idx = DensityIndex.build(segs)
            times.append((time.perf_counter() - t0) * 1e3)
        st = idx.stats(measure_memory=True)
        cand = [len(idx.candidate_ids(s.id)) for s in segs] or [0]
        row = [args.family, n, args.k if args.family == "star" else "", f"{float(np.median(times)):.1f}",
               idx.estimate.value, st.nodes, st.peak_square_count, st.list_entries,
               f"{st.bytes_per_segment or 0:.0f}", max(cand), f"{float(np.mean(cand)):.2f}"]
        if args.compare_naive:
            t0 = time.perf_counter()
            approx_density(segs, 3)
            naive = (time.perf_counter() - t0) * 1e3
            row += [f"{naive:.1f}", f"{naive / float(np.median(times)):.2f}"]
        if args.deterministic:
            row = ["" if c in ("wall_ms", "naive_ms", "speedup", "bytes_per_segment") else v
                   for c, v in zip(cols, row)]
        print(",".join(str(v) for v in row))
        sys.stdout.flush()
    return EXIT_OK


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="density-gauge", description="Approximate the density of planar segment sets.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads for per-curve loops (overridden by {THREADS_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    def input_opts(sp, formats=True):
        sp.add_argument("--input", required=True, help="input CSV file")
        if formats:
            sp.add_argument("--format", choices=("segments", "trajectories"), default="segments")
        sp.add_argument("--traj-format", choices=("csv_xy", "csv_txy"), default="csv_xy",
                        help="column layout of trajectory files")
        sp.add_argument("--header", action="store_true", help="skip the first line")
        sp.add_argument("--project", action="store_true",
                        help="read trajectory x,y as lon,lat degrees and project equirectangularly")
        sp.add_argument("--deterministic", action="store_true", help="omit timings from the output")

    e = sub.add_parser("estimate", help="estimate the density of one input")
    input_opts(e)
    e.add_argument("--algo", choices=ALGOS, default="approx3-fast")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("insert-sim", help="insert segments one at a time and trace the estimate")
    input_opts(s)
    s.add_argument("--order", dest="order_text", default="file", help="'file' or 'shuffled:SEED'")
    s.add_argument("--domain", type=_parse_box, default=None, help="index domain x0,y0,x1,y1")
    s.add_argument("--auto-renormalize", action="store_true",
                   help="rebuild over a larger domain instead of rejecting outside segments")
    s.add_argument("--report", default=None, help="write the final JSON report here")
    s.set_defaults(func=cmd_insert_sim)

    t = sub.add_parser("stats", help="per-curve density statistics of a trajectory file")
    input_opts(t, formats=False)
    t.add_argument("--factor", type=int, choices=(3, 4), default=4)
    t.add_argument("--max-curves", type=int, default=None, help="analyse a random sample of this many curves")
    t.add_argument("--seed", type=int, default=0, help="seed for --max-curves sampling")
    t.add_argument("--bins", type=int, default=10)
    t.add_argument("--name", default=None, help="dataset name for the table (default: file stem)")
    t.add_argument("--output-format", choices=("csv", "json"), default="csv")
    t.add_argument("--per-curve", default=None, help="write per-curve values as CSV")
    t.add_argument("--histogram", default=None, help="write the histogram as CSV")
    t.set_defaults(func=cmd_stats)

    b = sub.add_parser("bench", help="time the quadtree path on synthetic families")
    b.add_argument("--family", choices=("grid", "star", "random"), default="grid")
    b.add_argument("--sizes", type=_sizes, default=[1000, 2000, 4000])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--k", type=int, default=8, help="star size for the star family")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--compare-naive", action="store_true", help="also time the quadratic path")
    b.add_argument("--deterministic", action="store_true", help="omit timings from the output")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "insert-sim":
        try:
            args.order = _parse_order(args.order_text)
        except argparse.ArgumentTypeError as e:
            parser.error(str(e))
    if getattr(args, "bins", 1) < 1:
        parser.error("--bins must be at least 1")
    try:
        return args.func(args)
    except (InputFormatError, OSError, UnicodeDecodeError) as e:
        print(f"density-gauge: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, CapExceeded) as e:
        print(f"density-gauge: {e}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
