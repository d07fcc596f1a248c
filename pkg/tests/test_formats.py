import io

import numpy as np
import pytest

from density_gauge.errors import InputFormatError
from density_gauge.families import star
from density_gauge.formats import parse_segments, read_segments, write_segments


def test_round_trip(tmp_path):
    segs = star(7, np.random.default_rng(3))
    p = tmp_path / "s.csv"
    with open(p, "w", newline="", encoding="utf-8") as fh:
        write_segments(segs, fh, header=True)
    assert read_segments(p, header=True) == segs


def test_ids_follow_row_order_and_blank_lines_are_ignored():
    segs = parse_segments(io.StringIO("0,0,1,0\n\n2,2,3,3\n"))
    assert [s.id for s in segs] == [0, 1]


@pytest.mark.parametrize("text, line", [
    ("0,0,1,0\n0,0,1\n", 2),
    ("0,0,1,a\n", 1),
    ("0,0,1,0\n1,1,1,1\n", 2),
    ("0,0,nan,0\n", 1),
])
def test_malformed_rows(text, line):
    with pytest.raises(InputFormatError) as info:
        parse_segments(io.StringIO(text), source="f.csv")
    assert info.value.line == line and str(info.value).startswith(f"f.csv:{line}:")
