"""Wall time of the quadtree path as the input doubles, against the quadratic path.

Sizes are kept small so the script finishes in about a minute; pass larger
ones to reproduce the acceptance run.

    python3 demos/scaling.py 2000 4000 8000
"""

import sys
import time

from density_gauge import DensityIndex, approx_density
from density_gauge.families import unit_grid


def seconds(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def main() -> None:
    sizes = [int(v) for v in sys.argv[1:]] or [1000, 2000, 4000]
    prev = None
    print("     n   quadtree   ratio")
    for n in sizes:
        t = seconds(DensityIndex.build, unit_grid(n))
        ratio = f"{t / prev:6.2f}" if prev else "      "
        print(f"{n:6d}   {t:7.2f}s  {ratio}")
        prev = t
    n = sizes[0]
    segs = unit_grid(n)
    fast, naive = seconds(DensityIndex.build, segs), seconds(approx_density, segs, 3)
    print(f"\nn={n}: quadratic {naive:.2f}s vs quadtree {fast:.2f}s ({naive / fast:.1f}x)")


if __name__ == "__main__":
    main()
