"""Run named figure presets and print their headline numbers.

    python3 scripts/run_presets.py                 # all presets
    python3 scripts/run_presets.py fig2 fig8 --out-dir results
"""

import argparse
import time
from pathlib import Path

from rydghz.scenario import PRESETS, headline, run_preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=list(PRESETS))
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        t0 = time.perf_counter()
        ts, path = run_preset(name, out)
        print(f"{name}: {path} in {time.perf_counter() - t0:.1f} s")
        for expr, val, ref, tol in headline(name, ts):
            flag = "ok " if abs(val - ref) <= tol else "off"
            print(f"  [{flag}] {expr:>22} = {val:.5f}   ref {ref:.4f} +/- {tol:g}")


if __name__ == "__main__":
    main()
