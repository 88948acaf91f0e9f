#!/usr/bin/env python3
"""Exploratory comparison of three encoder variants on synthetic data.

Trains full attention, Fac-T-S and Binary-TS briefly on a small
moving-shapes dataset and prints their evaluation metrics side by side.
The numbers are informational only: at this scale and training budget they
say nothing about the published large-scale accuracy figures.

Usage: python3 scripts/compare_variants.py [--cli PATH] [--out DIR]
       [--epochs N] [--seed S]
"""

import argparse
import csv
import subprocess
import sys
from pathlib import Path

VARIANTS = ["full", "fac_ts", "binary_ts"]


def run(cli, *args):
    cmd = [cli, *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stdout + proc.stderr)
        raise SystemExit(f"command failed: {' '.join(cmd)}")
    return proc.stdout


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cli", default="build/predformer", help="predformer binary")
    ap.add_argument("--out", default="runs/compare", help="working directory")
    ap.add_argument("--epochs", type=int, default=40)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    cli = args.cli
    out = Path(args.out)
    data = out / "data"
    run(cli, "gen-data", "--out", data, "--count", 16, "--val-count", 8,
        "--seed", args.seed, "--force")

    rows = []
    for variant in VARIANTS:
        run_dir = out / f"train_{variant}"
        print(f"training {variant} ...", flush=True)
        run(cli, "train", "--data", data / "train.pfts", "--out", run_dir,
            "--variant", variant, "--layers", 4 if variant == "binary_ts" else 8,
            "--dim", 64, "--heads", 4, "--hidden", 128, "--patch", 8,
            "--epochs", args.epochs, "--batch-size", 8, "--seed", args.seed)
        eval_dir = out / f"eval_{variant}"
        run(cli, "eval", "--checkpoint", run_dir / "checkpoint_final.pfck",
            "--data", data / "val.pfts", "--out", eval_dir)
        with open(eval_dir / "report.csv") as f:
            rows.append(next(csv.DictReader(f)))

    print()
    print(f"{'variant':<12}{'params':>10}{'mse':>12}{'mae':>12}{'ssim':>10}{'psnr':>10}")
    for r in rows:
        print(f"{r['variant']:<12}{int(r['params']):>10}"
              f"{float(r['mse']):>12.5f}{float(r['mae']):>12.5f}"
              f"{float(r['ssim']):>10.4f}{float(r['psnr']):>10.2f}")
    print("\n(informational only: desk-scale data and training budget)")


if __name__ == "__main__":
    main()
