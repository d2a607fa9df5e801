"""Pattern occurrence counts ``t(sigma, pi)`` and pattern-avoidance utilities."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .errors import BudgetError, PermutonError
from .perm import Permutation, standardize
from .rng import as_generator

DEFAULT_BUDGET = 10**7
SEPARABLE_SCAN_MAX_N = 50
AVOIDER_MAX_N = 14


def default_budget() -> int:
    """Brute-force subset budget, overridable through ``PERMUTON_BUDGET``."""
    env = os.environ.get("PERMUTON_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@lru_cache(maxsize=None)
def all_permutations(k: int) -> tuple[Permutation, ...]:
    """``S_k`` in lexicographic one-line order."""
    return tuple(Permutation(v) for v in permutations(range(1, k + 1)))


@lru_cache(maxsize=None)
def _index(k: int) -> dict[tuple[int, ...], int]:
    return {s.values: i for i, s in enumerate(all_permutations(k))}


def perm_index(sigma: Permutation) -> int:
    """Position of ``sigma`` in ``all_permutations(len(sigma))``."""
    return _index(sigma.n)[sigma.values]


@dataclass(frozen=True)
class PatternTable:
    """Occurrence counts of every ``sigma`` in ``S_k`` inside a host of size ``n``."""

    k: int
    n: int
    counts: tuple[int, ...]  # aligned with all_permutations(k)

    def __post_init__(self):
        if len(self.counts) != factorial(self.k):
            raise PermutonError("counts must cover all of S_k")
        if sum(self.counts) != self.total:
            raise PermutonError(f"counts sum to {sum(self.counts)}, expected {self.total}")

    @property
    def total(self) -> int:
        return comb(self.n, self.k) if self.k <= self.n else 0

    @property
    def patterns(self) -> tuple[Permutation, ...]:
        return all_permutations(self.k)

    def count(self, sigma: Permutation) -> int:
        return self.counts[perm_index(sigma)]

    def frequency(self, sigma: Permutation) -> Fraction:
        if self.total == 0:
            return Fraction(0)
        return Fraction(self.count(sigma), self.total)

    def frequencies(self) -> np.ndarray:
        if self.total == 0:
            return np.zeros(len(self.counts))
        return np.asarray(self.counts, dtype=float) / self.total

    def as_dict(self) -> dict[str, int]:
        return {s.word(): c for s, c in zip(self.patterns, self.counts)}

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "counts": self.as_dict()}

    @classmethod
    def from_json(cls, obj: dict | str) -> "PatternTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        k = int(obj["k"])
        by_word = {Permutation.parse(w).values: int(c) for w, c in obj["counts"].items()}
        counts = tuple(by_word.get(s.values, 0) for s in all_permutations(k))
        return cls(k, int(obj["n"]), counts)


def count_patterns_bruteforce(p: Permutation, k: int, budget: int | None = None) -> PatternTable:
    """Count patterns by enumerating all ``binomial(n, k)`` position subsets."""
    if k < 1:
        raise PermutonError("k must be >= 1")
    budget = default_budget() if budget is None else budget
    n = p.n
    if k > n:
        return PatternTable(k, n, (0,) * factorial(k))
    if comb(n, k) > budget:
        raise BudgetError(f"binomial({n},{k}) = {comb(n, k)} exceeds the budget {budget}")
    index = _index(k)
    counts = [0] * factorial(k)
    vals = p.values
    for pos in combinations(range(n), k):
        counts[index[standardize([vals[i] for i in pos])]] += 1
    return PatternTable(k, n, tuple(counts))


def _left_smaller(vals) -> list[int]:
    """``#{i < j : v_i < v_j}`` for each ``j``; values in 1..n (Fenwick tree)."""
    n = len(vals)
    tree = [0] * (n + 1)
    out = []
    for v in vals:
        s, i = 0, v - 1
        while i > 0:
            s += tree[i]
            i -= i & -i
        out.append(s)
        i = v
        while i <= n:
            tree[i] += 1
            i += i & -i
    return out


def left_smaller_batch(perms: np.ndarray) -> np.ndarray:
    """Row-wise ``_left_smaller`` for a ``(B, n)`` array of 1-based permutations."""
    perms = np.asarray(perms, dtype=np.int64)
    b, n = perms.shape
    tree = np.zeros((b, n + 1), dtype=np.int64)
    out = np.empty((b, n), dtype=np.int64)
    rows = np.arange(b)
    for j in range(n):
        v = perms[:, j]
        s = np.zeros(b, dtype=np.int64)
        i = v - 1
        while np.any(i > 0):
            s += tree[rows, i]  # tree[:, 0] stays 0
            i = i - (i & -i)
        out[:, j] = s
        i = v.copy()
        while True:
            live = i <= n
            if not live.any():
                break
            tree[rows[live], i[live]] += 1
            i = np.where(live, i + (i & -i), n + 1)
    return out


def _counts3_from_ls(vals: np.ndarray, ls: np.ndarray) -> np.ndarray:
    """Length-3 counts from left-smaller counts; last axis is the position axis."""
    n = vals.shape[-1]
    j = np.arange(n)
    lsm = ls
    ll = j - lsm
    rs = (vals - 1) - lsm
    rl = (n - 1 - j) - rs
    c123 = (lsm * rl).sum(-1)
    c321 = (ll * rs).sum(-1)
    mid_max = (lsm * rs).sum(-1)
    mid_min = (ll * rl).sum(-1)
    first_min = (rl * (rl - 1) // 2).sum(-1)
    first_max = (rs * (rs - 1) // 2).sum(-1)
    c132 = first_min - c123
    c312 = first_max - c321
    c231 = mid_max - c132
    c213 = mid_min - c312
    return np.stack([c123, c132, c213, c231, c312, c321], axis=-1)


def count_patterns_fast(p: Permutation, k: int) -> PatternTable:
    """Counts for ``k`` in {1, 2, 3} from per-position smaller/larger tallies.

    ``k = 2`` is inversion counting; ``k = 3`` combines the four
    left/right smaller/larger counts at each position.
    """
    n = p.n
    if k not in (1, 2, 3):
        raise PermutonError("fast counter supports k in {1, 2, 3}")
    if k > n:
        return PatternTable(k, n, (0,) * factorial(k))
    if k == 1:
        return PatternTable(1, n, (n,))
    ls = _left_smaller(p.values)
    if k == 2:
        c12 = sum(ls)
        return PatternTable(2, n, (c12, comb(n, 2) - c12))
    c = _counts3_from_ls(np.asarray(p.values, dtype=np.int64), np.asarray(ls, dtype=np.int64))
    return PatternTable(3, n, tuple(int(x) for x in c))


def counts3_batch(perms: np.ndarray) -> np.ndarray:
    """Length-3 counts for each row of a ``(B, n)`` array of permutations."""
    perms = np.asarray(perms, dtype=np.int64)
    return _counts3_from_ls(perms, left_smaller_batch(perms))


@lru_cache(maxsize=None)
def _lut4() -> np.ndarray:
    # (pattern of b,c,d in S_3, number of the three values below a) -> S_4 index
    idx4 = _index(4)
    lut = np.zeros((6, 4), dtype=np.int64)
    for t, tau in enumerate(all_permutations(3)):
        for r in range(4):
            word = (r + 1,) + tuple(v + 1 if v > r else v for v in tau.values)
            lut[t, r] = idx4[word]
    return lut


def counts4_array(vals) -> np.ndarray:
    """Length-4 counts of one permutation in O(n^3) vectorized time."""
    v = np.asarray(vals, dtype=np.int64) - 1
    n = v.size
    out = np.zeros(24, dtype=np.int64)
    if n < 4:
        return out
    # below[i, w] = #{a < i : v[a] < w}
    ind = np.zeros((n, n), dtype=np.int64)
    ind[np.arange(n), v] = 1
    below = np.zeros((n + 1, n + 1), dtype=np.int64)
    below[1:, 1:] = np.cumsum(np.cumsum(ind, axis=0), axis=1)
    lut = _lut4()
    for b in range(1, n - 2):
        m = n - b - 1
        ci, di = np.triu_indices(m, 1)
        vc = v[b + 1 + ci]
        vd = v[b + 1 + di]
        vb = np.full(vc.shape, v[b])
        lo = np.minimum(np.minimum(vb, vc), vd)
        hi = np.maximum(np.maximum(vb, vc), vd)
        mid = vb + vc + vd - lo - hi
        row = below[b]
        c0 = row[lo]
        c1 = row[mid] - c0
        c2 = row[hi] - row[mid]
        c3 = b - row[hi]
        tau = _triple_index(vb, vc, vd)
        for r, cnt in enumerate((c0, c1, c2, c3)):
            out += np.bincount(lut[tau, r], weights=cnt, minlength=24).astype(np.int64)
    return out


def _triple_index(a, b, c) -> np.ndarray:
    """Index in lexicographic ``S_3`` of the pattern of ``(a, b, c)``, elementwise."""
    ab, ac, bc = a < b, a < c, b < c
    out = np.empty(a.shape, dtype=np.int64)
    out[ab & bc] = 0               # 123
    out[ab & ac & ~bc] = 1         # 132
    out[~ab & ac] = 2              # 213
    out[ab & ~ac] = 3              # 231
    out[~ab & ~ac & bc] = 4        # 312
    out[~ab & ~bc] = 5             # 321
    return out


def count_patterns4(p: Permutation) -> PatternTable:
    return PatternTable(4, p.n, tuple(int(x) for x in counts4_array(p.values)))


def count_patterns(p: Permutation, k: int, budget: int | None = None) -> PatternTable:
    """Dispatch to the fastest exact counter available for ``k``."""
    if k <= 3:
        return count_patterns_fast(p, k)
    if k == 4:
        return count_patterns4(p)
    return count_patterns_bruteforce(p, k, budget)


def pattern_frequency(sigma: Permutation, pi: Permutation) -> Fraction:
    """Exact ``t(sigma, pi)``; zero when ``|sigma| > |pi|``."""
    k, n = sigma.n, pi.n
    if k > n:
        return Fraction(0)
    hits = 0
    vals = pi.values
    target = sigma.values
    for pos in combinations(range(n), k):
        if standardize([vals[i] for i in pos]) == target:
            hits += 1
    return Fraction(hits, comb(n, k))


@lru_cache(maxsize=None)
def _frequency_rows(k: int, n: int) -> dict[tuple[int, ...], tuple[Fraction, ...]]:
    # t(., rho) over S_k for every rho in S_n
    rows = {}
    for rho in all_permutations(n):
        tab = count_patterns_bruteforce(rho, k)
        rows[rho.values] = tuple(Fraction(c, tab.total) for c in tab.counts)
    return rows


def verify_cotransition(sigma: Permutation, rho: Permutation, l: int) -> tuple[Fraction, Fraction]:
    """Both sides of ``t(sigma, rho) = sum_tau t(sigma, tau) t(tau, rho)``, tau over ``S_l``."""
    k, m = sigma.n, rho.n
    if not k < l < m:
        raise PermutonError(f"need |sigma| < l < |rho|, got {k}, {l}, {m}")
    lhs = pattern_frequency(sigma, rho)
    to_rho = count_patterns_bruteforce(rho, l)
    si = perm_index(sigma)
    rows = _frequency_rows(k, l)
    rhs = Fraction(0)
    for tau, c in zip(all_permutations(l), to_rho.counts):
        if c:
            rhs += rows[tau.values][si] * Fraction(c, to_rho.total)
    return lhs, rhs


# --- separability ------------------------------------------------------------

_FORBIDDEN = ((2, 4, 1, 3), (3, 1, 4, 2))


def _separable_scan(p: Permutation) -> bool:
    vals = p.values
    for pos in combinations(range(p.n), 4):
        if standardize([vals[i] for i in pos]) in _FORBIDDEN:
            return False
    return True


def _separable_stack(p: Permutation) -> bool:
    # merge adjacent blocks whose values form an interval; separable iff one block remains
    stack: list[tuple[int, int]] = []
    for v in p.values:
        lo, hi = v, v
        while stack and (stack[-1][1] + 1 == lo or stack[-1][0] - 1 == hi):
            a, b = stack.pop()
            lo, hi = min(a, lo), max(b, hi)
        stack.append((lo, hi))
    return len(stack) == 1


def is_separable(p: Permutation, method: str = "auto") -> bool:
    """True iff ``p`` avoids both 2413 and 3142."""
    if method == "auto":
        method = "scan" if p.n <= SEPARABLE_SCAN_MAX_N else "stack"
    if method == "scan":
        return _separable_scan(p)
    if method == "stack":
        return _separable_stack(p)
    raise PermutonError(f"unknown method {method!r}")


def sample_avoider_uniform(n: int, seed=None, max_n: int = AVOIDER_MAX_N) -> Permutation:
    """Uniform separable permutation of size ``n`` by rejection from uniform ``S_n``."""
    if n < 1:
        raise PermutonError("n must be >= 1")
    if n > max_n:
        raise BudgetError(f"rejection sampling capped at n={max_n}")
    rng = as_generator(seed)
    while True:
        p = Permutation(tuple(rng.permutation(n) + 1))
        if _separable_stack(p):
            return p
