"""Per-curve density statistics over the bundled synthetic trajectory set.

Prints the six-column summary table for the 4-approximate and exact values,
then a histogram of the per-curve 4-approximations.

    python3 demos/trajectory_stats.py
"""

from importlib import resources

from density_gauge.trajectories import dataset_stats, histogram, ingest, stats_table_csv


def main() -> None:
    data = resources.files("density_gauge") / "data" / "synthetic_curves.csv"
    with resources.as_file(data) as path:
        curves = ingest(path, header=True)

    approx = dataset_stats(curves, factor=4, name="synthetic (4-approx)")
    exact = dataset_stats(curves, factor=1, name="synthetic (exact)")
    print(stats_table_csv([approx, exact]))

    print("histogram of 4-approximate values:")
    for lo, hi, count in histogram(approx, bins=6).rows():
        print(f"  [{lo:5.2f}, {hi:5.2f})  {'#' * count} {count}")


if __name__ == "__main__":
    main()
