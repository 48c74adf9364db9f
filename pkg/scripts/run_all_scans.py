#!/usr/bin/env python3
"""Run every experiment subcommand once and collect the CSV reports in one directory.

Usage: python3 scripts/run_all_scans.py [--out-dir results] [--quick]
"""

import argparse
import sys
import time
from pathlib import Path

from tfmult.xlab.cli import main as cli

# (subcommand, output stem, flags)
RUNS = [
    ("norm", "norm", []),
    ("multiplier", "multiplier_fresnel", ["--phase", "fresnel_osc"]),
    ("multiplier", "multiplier_schrodinger", ["--phase", "schrodinger_t"]),
    ("schrodinger-scan", "schrodinger", []),
    ("dilation-scan", "dilation_large", ["--regime", "large", "--jmax", "4"]),
    ("dilation-scan", "dilation_small", ["--regime", "small", "--jmax", "4"]),
    ("threshold-scan", "threshold_p1", ["--p", "1", "--alpha", "3", "--deltas", "0,0.25,0.5", "--jmax", "6"]),
    ("threshold-scan", "threshold_p2", ["--p", "2", "--alpha", "3", "--deltas", "0", "--jmax", "6"]),
    ("exp-bound", "exp_bound_schrodinger", ["--phase", "schrodinger_t"]),
    ("exp-bound", "exp_bound_fresnel", ["--phase", "fresnel_osc"]),
    ("dyadic-sum", "dyadic_p1", ["--p", "1"]),
    ("dyadic-sum", "dyadic_pinf", ["--p", "inf"]),
    ("indices", "indices", []),
]
QUICK_SKIP = {"threshold_p1", "threshold_p2", "dyadic_p1", "dyadic_pinf"}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--quick", action="store_true", help="skip the scans that take more than a few seconds")
    args = ap.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for cmd, stem, flags in RUNS:
        if args.quick and stem in QUICK_SKIP:
            continue
        t0 = time.perf_counter()
        code = cli([cmd, *flags, "--out", str(args.out_dir / f"{stem}.csv")])
        print(f"{stem:24s} exit={code} {time.perf_counter() - t0:6.1f}s")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
