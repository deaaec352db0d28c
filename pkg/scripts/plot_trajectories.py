"""Scatter knowledge gain against mapping condition per block from a metrics.csv.

Needs matplotlib (pip install "artifact[plot]").

    python scripts/plot_trajectories.py runs/default/metrics.csv --out gain_vs_kappa.png
"""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--out", default="gain_vs_kappa.png")
    ap.add_argument("--mode", choices=["3", "4", "avg"], default="avg")
    args = ap.parse_args()

    g_col, k_col = (f"G{args.mode}", f"kappa{args.mode}") if args.mode != "avg" else ("G_avg", "kappa_avg")
    series = defaultdict(list)
    with open(args.csv) as f:
        for row in csv.DictReader(f):
            kappa = float(row[k_col])
            if kappa == kappa:  # undefined kappa is nan and has no point to plot
                series[int(row["block"])].append((kappa, float(row[g_col]), int(row["epoch"])))

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for block, pts in sorted(series.items()):
        k, g, _ = zip(*pts)
        ax.plot(k, g, "-o", ms=3, label=f"block {block}")
    ax.set_xlabel("mapping condition")
    ax.set_ylabel("knowledge gain")
    if series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
