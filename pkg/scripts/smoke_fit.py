"""Simulate the smoke scenario and fit it with 2000 sweeps; prints timing and window calls.

    python scripts/smoke_fit.py [--seed 1] [--out runs/smoke]
"""

import argparse
import time
from pathlib import Path

from cwvsmix.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]


def run(seed: int, out: Path) -> float:
    started = time.perf_counter()
    cli(["simulate", "--scenario", str(ROOT / "scenarios" / "smoke.json"), "--out", str(out / "sim"), "--seed", str(seed)])
    cli(["fit", "--data", str(out / "sim" / "data.csv"), "--out", str(out / "fit"), "--seed", str(seed + 1),
         "--burn", "1000", "--keep", "1000", "--thin", "1"])
    cli(["diagnose", "--samples", str(out / "fit")])
    return time.perf_counter() - started


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="runs/smoke")
    args = ap.parse_args()
    secs = run(args.seed, Path(args.out))
    print(f"smoke run finished in {secs:.1f} s; outputs under {args.out}")
