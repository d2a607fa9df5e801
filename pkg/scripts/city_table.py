"""Order-relating permutation of the city sample and its pattern table."""
import argparse

from permuton.data import TABLE1_FREQUENCIES, city_sample
from permuton.indep import kendall_test, pattern3_joint_test, pattern3_test
from permuton.patterns import count_patterns_fast
from permuton.perm import ranks


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.parse_args()
    pi = ranks(city_sample())[2]
    print(f"pi = {pi}")
    tab = count_patterns_fast(pi, 3)
    print(f"{'pattern':>8} {'count':>6} {'freq':>7} {'published':>10}")
    for (w, c), f, r in zip(tab.as_dict().items(), tab.frequencies(), TABLE1_FREQUENCIES):
        print(f"{w:>8} {c:>6} {f:>7.3f} {r:>10.3f}")
    print(f"total {tab.total}")
    for rep in (kendall_test(pi), pattern3_test(pi, "312"), pattern3_joint_test(pi)):
        print(f"{rep.test:>15}: statistic {rep.statistic:.4f}, p {rep.p_value:.4f}")


if __name__ == "__main__":
    main()
