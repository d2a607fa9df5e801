"""Empirical rejection rates of the independence tests under the null."""
import argparse

import numpy as np

from permuton.indep import (independent_permutations, kendall_test, pattern3_joint_test,
                            pattern3_test, pattern4_null_cov, pattern4_test_mc)
from permuton.perm import Permutation


def rate(test, perms, alpha):
    return np.mean([test(Permutation(tuple(int(v) for v in row))).p_value < alpha for row in perms])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.1)
    ap.add_argument("--m", type=int, default=1000, help="null samples for the length-4 covariance")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    perms = independent_permutations(args.n, args.reps, seed=args.seed)
    cov = pattern4_null_cov(args.n, args.m, seed=args.seed + 1)
    tests = {
        "kendall": kendall_test,
        "pattern3 (312)": lambda p: pattern3_test(p, "312"),
        "pattern3 joint": pattern3_joint_test,
        "pattern4": lambda p: pattern4_test_mc(p, null_cov=cov),
    }
    se = np.sqrt(args.alpha * (1 - args.alpha) / args.reps)
    print(f"n={args.n}, reps={args.reps}, nominal {args.alpha} (SE {se:.3f})")
    for name, test in tests.items():
        print(f"{name:>15}: {rate(test, perms, args.alpha):.3f}")


if __name__ == "__main__":
    main()
