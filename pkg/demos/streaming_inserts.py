"""Insert segments one at a time and watch the maintained estimate.

The estimate never decreases and stays within a factor 3 of the exact
value.  An insert outside the index domain is refused with the bounds a
rebuilt index would need.

    python3 demos/streaming_inserts.py
"""

import numpy as np

from density_gauge import DensityIndex, DomainError, Segment, oracle_density
from density_gauge.canonical import bounding_box
from density_gauge.families import random_segments, star


def main() -> None:
    rng = np.random.default_rng(3)
    segs = random_segments(rng, 40, density=0.5) + star(8, rng, center=(4.0, 4.0), first_id=40)
    idx = DensityIndex.empty(bounding_box(segs))
    print(" k  estimate  exact")
    for k, s in enumerate(segs, start=1):
        est = idx.insert(s)
        if k % 6 == 0 or k == len(segs):
            print(f"{k:2d}  {est.value:8d}  {oracle_density(segs[:k]):5d}")

    far = Segment(999, (50.0, 50.0), (51.0, 50.0))
    try:
        idx.insert(far)
    except DomainError as e:
        print(f"\nrefused: {e}")
        idx = idx.rebuild(e.required_bounds)
        print(f"after rebuild: {idx.insert(far).value} (stored {len(idx)} segments)")


if __name__ == "__main__":
    main()
