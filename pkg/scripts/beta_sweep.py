"""Train AdaS over a beta grid plus a fixed-rate baseline and tabulate test accuracy.

    python scripts/beta_sweep.py --out runs/sweep --epochs 20 --seeds 0 1 2
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from adas.cli import run_experiment
from adas.config import load_config


def accuracy_by_epoch(path: Path) -> dict[int, float]:
    with open(path) as f:
        return {int(r["epoch"]): float(r["test_accuracy"]) for r in csv.DictReader(f)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/sweep")
    ap.add_argument("--config", help="base key = value file")
    ap.add_argument("--betas", type=float, nargs="+", default=[0.8, 0.85, 0.9, 0.95])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--report-epochs", type=int, nargs="+", default=[5, 10, 20])
    args = ap.parse_args()

    variants = [(f"adas b={b:g}", {"optimizer": "adas", "beta": str(b)}) for b in args.betas]
    variants.append(("fixed", {"optimizer": "fixed"}))
    table = {}
    for label, opts in variants:
        curves = []
        for seed in args.seeds:
            out = Path(args.out) / f"{label.replace(' ', '_').replace('=', '')}-seed{seed}"
            cfg = load_config(args.config, {**opts, "epochs": str(args.epochs), "seed": str(seed), "output": str(out)})
            run_experiment(cfg)
            curves.append(accuracy_by_epoch(out / "metrics.csv"))
        table[label] = {e: np.mean([c[e] for c in curves]) for e in args.report_epochs if e <= args.epochs}
        print(label, " ".join(f"ep{e}={v:.4f}" for e, v in table[label].items()), flush=True)


if __name__ == "__main__":
    main()
