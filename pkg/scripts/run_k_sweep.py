#!/usr/bin/env python3
"""Power as the neighbor count varies as k = floor(n^alpha).

    python scripts/run_k_sweep.py --setting tune_i --n 50 --alphas 0.1 0.3 0.5 0.7 0.9
"""

import argparse
import sys

from gitest.simulate import SettingSpec, k_sweep, tidy_csv, tidy_from_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--setting", default="tune_i", choices=["tune_i", "tune_ii", "tune_iii"])
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--p", type=int, default=100)
    ap.add_argument("--alphas", nargs="+", type=float,
                    default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--level", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--output", default=None)
    args = ap.parse_args()

    spec = SettingSpec(id=args.setting, n=args.n, p=args.p, seed=args.seed)
    rows = k_sweep(spec, args.alphas, reps=args.reps, level=args.level)
    for row in rows:
        print(f"# alpha={row['alpha']:g} k={row['k']}: power {row['power']:.3f}",
              file=sys.stderr)
    text = tidy_csv(tidy_from_sweep(spec, rows, args.reps, args.level))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
