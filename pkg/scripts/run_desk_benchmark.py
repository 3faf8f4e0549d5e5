"""Desk-scale Setting 1A comparison of CWVSmix against the equal-weight baseline.

Defaults match the acceptance benchmark: n=1000, m=10, q=3, 20 replicates,
5000 burn-in sweeps then 5000 sweeps thinned by 5.

    python scripts/run_desk_benchmark.py --workers 4 --out runs/desk_1a
"""

import argparse
import sys

from cwvsmix.cli import main as cli


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default="scenarios/desk_1a.json")
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="runs/desk_1a")
    args = ap.parse_args()
    sys.exit(
        cli([
            "benchmark", "--scenario", args.scenario, "--replicates", str(args.replicates),
            "--methods", "cwvsmix,ew", "--out", args.out, "--seed", str(args.seed),
            "--workers", str(args.workers), "--burn", "5000", "--keep", "1000", "--thin", "5",
        ])
    )
