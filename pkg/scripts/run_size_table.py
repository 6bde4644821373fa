#!/usr/bin/env python3
"""Empirical size of the analytic test under the independent-null settings.

Produces one CSV row per (setting, n, p) cell.  The full grid at 500
replications takes a while; the default is a reduced grid.

    python scripts/run_size_table.py --reps 500 --n 50 100 150 --p 20 100
"""

import argparse
import sys

from gitest.simulate import SettingSpec, estimate_power, power_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--settings", nargs="+", default=["s5_1", "s5_2", "s5_3"])
    ap.add_argument("--n", nargs="+", type=int, default=[50, 100])
    ap.add_argument("--p", nargs="+", type=int, default=[20, 100])
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--level", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timing", action="store_true")
    ap.add_argument("--output", default=None, help="write CSV here instead of stdout")
    args = ap.parse_args()

    estimates = []
    for setting in args.settings:
        for n in args.n:
            for p in args.p:
                spec = SettingSpec(id=setting, n=n, p=p, seed=args.seed)
                est = estimate_power(spec, reps=args.reps, level=args.level)
                estimates.append(est)
                print(f"# {setting} n={n} p={p}: size {est.power:.3f}", file=sys.stderr)
    text = power_csv(estimates, timing=args.timing)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
