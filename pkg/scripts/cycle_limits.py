"""Largest cycle of a uniform permutation against the largest stick."""
import argparse

import numpy as np
from scipy import stats

from permuton.partitions import largest_cycle_fractions, largest_stick


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    a = largest_cycle_fractions(args.n, args.reps, seed=args.seed)
    b = largest_stick(args.reps, seed=args.seed + 1)
    print(f"mean largest cycle / n: {a.mean():.4f}")
    print(f"mean largest stick:     {b.mean():.4f}")
    print(f"quantiles (cycle)  {np.quantile(a, [.1, .5, .9]).round(3)}")
    print(f"quantiles (stick)  {np.quantile(b, [.1, .5, .9]).round(3)}")
    print(f"KS distance {stats.ks_2samp(a, b).statistic:.4f}")


if __name__ == "__main__":
    main()
