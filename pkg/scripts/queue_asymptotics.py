"""Inversion frequency of M/G/1 permutations against the busy-period bound."""
import argparse

import numpy as np

from permuton.queues import ServiceDist, max_period_size, simulate_mg1, verify_inversion_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--service", default="exp:1")
    ap.add_argument("--discipline", default="lifo-pr")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 10_000])
    args = ap.parse_args()
    service = ServiceDist.parse(args.service)
    print(f"{'n':>7} {'mean t21':>10} {'mean bound':>11} {'max period':>11}")
    for n in args.sizes:
        t21, bound, big = [], [], []
        for seed in range(args.seeds):
            tr = simulate_mg1(args.lam, service, n, seed=seed, discipline=args.discipline)
            lhs, rhs = verify_inversion_bound(tr, n)
            t21.append(float(lhs))
            bound.append(float(rhs))
            big.append(max_period_size(tr, n))
        print(f"{n:>7} {np.mean(t21):>10.2e} {np.mean(bound):>11.2e} {max(big):>11}")


if __name__ == "__main__":
    main()
