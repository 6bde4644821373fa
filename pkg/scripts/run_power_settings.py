#!/usr/bin/env python3
"""Power of the default test across the alternative-hypothesis settings.

    python scripts/run_power_settings.py --settings s1_1 s3_1 --n 100 --p 20 100
"""

import argparse
import sys

from gitest.simulate import SettingSpec, estimate_power, power_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--settings", nargs="+",
                    default=["motivating", "s1_1", "s2_1", "s3_1", "s4_1"])
    ap.add_argument("--n", nargs="+", type=int, default=[100])
    ap.add_argument("--p", nargs="+", type=int, default=[100])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--level", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timing", action="store_true")
    ap.add_argument("--output", default=None)
    args = ap.parse_args()

    estimates = []
    for setting in args.settings:
        for n in args.n:
            for p in args.p:
                spec = SettingSpec(id=setting, n=n, p=p, seed=args.seed)
                est = estimate_power(spec, reps=args.reps, level=args.level)
                estimates.append(est)
                print(f"# {setting} n={n} p={p}: power {est.power:.3f}", file=sys.stderr)
    text = power_csv(estimates, timing=args.timing)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
