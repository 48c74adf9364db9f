#!/usr/bin/env python3
"""Dense-grid oracle run for the empirically calibrated constants.

Every measurement is taken on the base grid and at one and two refinements
(n and L doubled each time).  The frozen values in ``tests/calibration.py`` were
copied from this output with a safety margin; rerun after any numerical change.

    python3 scripts/calibrate_oracles.py --out scripts/oracle_calibration.json
"""

import argparse
import json
import time

from tfmult.gabor import INF
from tfmult.xlab import calibration as cal


def timed(label, fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    print(f"{label:40s} {time.perf_counter() - t:7.1f}s", flush=True)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="oracle_calibration.json")
    ap.add_argument("--levels", type=int, default=2, help="highest refinement level")
    ap.add_argument("--skip-slow", action="store_true", help="skip threshold and dyadic runs")
    args = ap.parse_args()
    levels = range(args.levels + 1)
    res: dict = {"levels": list(levels)}

    res["block"] = {f"{p},{q}": [timed(f"block {p},{q} r={r}", cal.measure_block_constant, p, q, r)["C"]
                                 for r in levels] for p, q in cal.BLOCK_PAIRS}
    res["window"] = {f"{p},{q}": [timed(f"window {p},{q} r={r}", cal.measure_window_constant, p, q, r)["C"]
                                  for r in levels] for p, q in cal.BLOCK_PAIRS}
    res["product"] = {f"{p},{q}": [timed(f"product {p},{q} r={r}", cal.measure_product_constant, p, q,
                                         refine=r)["C"] for r in levels] for p, q in cal.PRODUCT_PAIRS}
    res["amalgam_fourier"] = [timed(f"amalgam-fourier r={r}", cal.measure_amalgam_fourier, r) for r in levels]
    res["averaged_dilate"] = [timed(f"averaged-dilate r={r}", cal.measure_averaged_dilate, r) for r in levels]
    res["bessel"] = [timed(f"bessel r={r}", cal.measure_bessel, refine=r) for r in levels]
    if not args.skip_slow:
        res["threshold"] = [timed(f"threshold r={r}", cal.measure_threshold_slope, r) for r in levels]
        res["dyadic"] = {str(p): [timed(f"dyadic p={p} r={r}", cal.measure_dyadic_constant, p, r)
                                  for r in levels] for p in (1, INF)}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(res, fh, indent=1, sort_keys=True, default=str)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
