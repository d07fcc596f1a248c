"""Reading and writing segment sets as ``x1,y1,x2,y2`` CSV."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, TextIO

from .errors import InputFormatError
from .geometry import Segment


def parse_segments(stream: TextIO, header: bool = False, source: str = "<stream>") -> list[Segment]:
    """One segment per non-blank row; ids follow row order starting at 0."""
    out: list[Segment] = []
    for line, rec in enumerate(csv.reader(stream), start=1):
        if header and line == 1:
            continue
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != 4:
            raise InputFormatError(f"expected 4 fields x1,y1,x2,y2, got {len(rec)}", line, source)
        try:
            vals = [float(f) for f in rec]
        except ValueError:
            raise InputFormatError(f"non-numeric field in {rec!r}", line, source) from None
        if not all(math.isfinite(v) for v in vals):
            raise InputFormatError("non-finite coordinate", line, source)
        try:
            out.append(Segment(len(out), vals[0:2], vals[2:4]))
        except ValueError:
            raise InputFormatError("zero-length segment", line, source) from None
    return out


def read_segments(path: str | Path, header: bool = False) -> list[Segment]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_segments(fh, header, str(path))


def write_segments(segments: Iterable[Segment], stream: TextIO, header: bool = False) -> None:
    w = csv.writer(stream, lineterminator="\n")
    if header:
        w.writerow(("x1", "y1", "x2", "y2"))
    for s in segments:
        w.writerow([repr(v) for v in s.coords()])
