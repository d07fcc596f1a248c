"""Dyadic machinery behind the quadtree: separators, canonical covers, Z-order.

    python3 demos/canonical_squares.py
"""

from functools import cmp_to_key

from density_gauge.canonical import (
    ROOT,
    bit_delta,
    canonical_cover,
    clip_to_unit,
    lca,
    most_significant_separator,
    zorder_compare,
)
from density_gauge.geometry import Segment, qs_bounds


def main() -> None:
    print("first differing bit of 0.3 and 0.6:", bit_delta(0.3, 0.6))
    for lo, hi in ((0.3, 0.6), (0.26, 0.3), (0.25, 0.25 + 2 ** -20)):
        sep = most_significant_separator(lo, hi)
        print(f"separator of [{lo}, {hi}]: {sep.k}/2^{sep.level} = {sep.value}")

    s = Segment(0, (0.40, 0.41), (0.43, 0.45))
    box = clip_to_unit(qs_bounds(s))
    cells = canonical_cover(box, s.length)
    print(f"\nsegment of length {s.length:.3f}: {len(cells)} canonical squares of side {cells[0].side}")

    a, b = cells[0], cells[-1]
    print(f"lowest common ancestor of {tuple(a)} and {tuple(b)}: {tuple(lca(a, b))}")

    squares = [ROOT] + ROOT.children() + ROOT.children()[0].children()
    ordered = sorted(squares, key=cmp_to_key(zorder_compare))
    print("\nZ-order, ancestors first, then bottom-left, bottom-right, top-left, top-right:")
    for sq in ordered:
        print(f"  level {sq.level}  ({sq.kx}, {sq.ky})")


if __name__ == "__main__":
    main()
