"""Regenerate the bundled synthetic trajectory dataset and its frozen densities.

Writes ``synthetic_curves.csv`` (``id,x,y`` rows for 50 small curves) and
``synthetic_curves_lambda.csv`` (the exact per-curve density from the
brute-force oracle).  With ``--check`` nothing is written; the script only
reports whether the bundled files would change.

    python3 demos/make_synthetic_dataset.py --check
"""

import argparse
import io
from pathlib import Path

from density_gauge.families import synthetic_curves
from density_gauge.naive import oracle_density
from density_gauge.trajectories import Trajectory, write_trajectories_csv

DATA = Path(__file__).resolve().parents[1] / "src" / "density_gauge" / "data"


def render(seed: int, count: int) -> tuple[str, str]:
    curves = synthetic_curves(seed=seed, count=count)
    points = io.StringIO()
    write_trajectories_csv(curves, points)
    lines = ["id,n,lambda"]
    for cid, verts in curves:
        t = Trajectory(cid, tuple(map(tuple, verts.tolist())))
        lam = oracle_density(t.segments())
        lines.append(f"{cid},{t.segment_count},{lam}")
        print(f"{cid:>12}  n={t.segment_count:3d}  lambda={lam}")
    return points.getvalue(), "\n".join(lines) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--check", action="store_true", help="compare with the bundled files instead of writing")
    args = ap.parse_args()
    files = dict(zip(("synthetic_curves.csv", "synthetic_curves_lambda.csv"), render(args.seed, args.count)))
    for name, text in files.items():
        path = DATA / name
        if args.check:
            same = path.read_text(encoding="utf-8") == text
            print(f"{name}: {'unchanged' if same else 'WOULD CHANGE'}")
        else:
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path}")


if __name__ == "__main__":
    main()
