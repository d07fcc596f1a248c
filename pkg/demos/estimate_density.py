"""Exact density versus the 25-, 4- and 3-approximations on small inputs.

For each instance the oracle gives the true value ``lambda``; every estimate
must land in ``[ceil(lambda / f), lambda]`` for its factor ``f``.

    python3 demos/estimate_density.py
"""

import numpy as np

from density_gauge import DensityIndex, approx_density, count_intersecting, oracle_witness
from density_gauge.families import collinear_chain, figure_one, random_segments, star
from density_gauge.naive import sandwich_holds


def main() -> None:
    rng = np.random.default_rng(0)
    instances = {
        "four tangent sides": figure_one(),
        "star of 12": star(12, rng),
        "chain of 6": collinear_chain(6),
        "random, 100": random_segments(rng, 100, density=1.0),
    }
    print(f"{'instance':>20} {'n':>4} {'lambda':>6}   f=25   f=4  f=3 naive  f=3 quadtree")
    for name, segs in instances.items():
        exact = oracle_witness(segs)
        row = [approx_density(segs, 25), approx_density(segs, 4), approx_density(segs, 3),
               DensityIndex.build(segs).estimate]
        assert all(sandwich_holds(e.value, exact.value, e.factor) for e in row)
        print(f"{name:>20} {len(segs):>4} {exact.value:>6}   " + "   ".join(f"{e.value:>4}" for e in row))

    # every estimate comes with a ball that really meets that many segments
    segs = instances["random, 100"]
    est = DensityIndex.build(segs).estimate
    print(f"\nwitness ball {est.witness} meets {count_intersecting(segs, est.witness)} segments")


if __name__ == "__main__":
    main()
