"""Integer partitions, the Young lattice and partition-valued growth chains.

Two chains on the Young lattice are covered. Cycle types of the Chinese
restaurant process move down by atom removal: the element ``n`` sits in a
cycle of length ``p`` with probability ``p * m_p / n``, where ``m_p`` is the
number of cycles of that length. The Plancherel growth process moves up with
probabilities ``d_eta / ((n + 1) d_lambda)``.
"""
from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod

import numpy as np

from .chains import Trajectory
from .errors import BudgetError, PermutonError
from .perm import Permutation, to_cycles
from .rng import as_generator


@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise PermutonError(f"not a partition: {self.parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip().strip("()")
        if not text:
            return cls(())
        try:
            return cls(tuple(int(t) for t in text.split(",")))
        except ValueError as exc:
            raise PermutonError(f"cannot parse partition {text!r}") from exc

    @classmethod
    def of(cls, lengths) -> "Partition":
        return cls(tuple(sorted((int(x) for x in lengths), reverse=True)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __str__(self) -> str:
        return ",".join(map(str, self.parts))

    def multiplicities(self) -> Counter:
        return Counter(self.parts)


@dataclass(frozen=True)
class CycleType:
    """``counts[i - 1]`` is the number of cycles of length ``i``."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise PermutonError("negative cycle count")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return sum(i * c for i, c in enumerate(self.counts, start=1))

    def count(self, i: int) -> int:
        return self.counts[i - 1] if 1 <= i <= len(self.counts) else 0

    def partition(self) -> Partition:
        return Partition.of(i for i, c in enumerate(self.counts, start=1) for _ in range(c))

    @classmethod
    def from_partition(cls, lam: Partition, n: int | None = None) -> "CycleType":
        n = lam.n if n is None else n
        m = lam.multiplicities()
        return cls(tuple(m.get(i, 0) for i in range(1, n + 1)))


@dataclass(frozen=True)
class BoundaryPoint:
    """A pair of decreasing sequences in ``[0, 1]``.

    Points of the Thoma simplex also satisfy ``sum(alpha) + sum(beta) <= 1``;
    row and column fractions of a finite diagram need not, so that condition
    is reported by ``in_simplex`` instead of enforced.
    """

    alpha: tuple[float, ...]
    beta: tuple[float, ...] = ()

    def __post_init__(self):
        for seq in (self.alpha, self.beta):
            if any(a < b for a, b in zip(seq, seq[1:])) or any(not 0 <= v <= 1 for v in seq):
                raise PermutonError("coordinates must be decreasing and in [0, 1]")

    def in_simplex(self, tol: float = 1e-12) -> bool:
        return sum(self.alpha) + sum(self.beta) <= 1 + tol


# --- cycle statistics ----------------------------------------------------

def cycle_type(p: Permutation) -> tuple[CycleType, Partition]:
    lam = Partition.of(len(c) for c in to_cycles(p).cycles)
    return CycleType.from_partition(lam, p.n), lam


def cycle_type_pmf(c: CycleType | Partition, n: int | None = None) -> Fraction:
    """Probability of the cycle type under the uniform law on ``S_n``."""
    if isinstance(c, Partition):
        c = CycleType.from_partition(c)
    if n is not None and c.n != n:
        raise PermutonError(f"cycle counts give n={c.n}, expected {n}")
    out = Fraction(1)
    for i, ci in enumerate(c.counts, start=1):
        out /= i ** ci * factorial(ci)
    return out


def fixed_point_prob(n: int) -> Fraction:
    """Probability that a uniform permutation of ``n`` has a fixed point."""
    if n < 1:
        raise PermutonError("n must be >= 1")
    return sum((Fraction((-1) ** (k + 1), factorial(k)) for k in range(1, n + 1)), Fraction(0))


def conditioned_poisson_exact(n: int) -> dict[Partition, Fraction]:
    """Law of independent ``Z_i ~ Poisson(1/i)`` conditioned on ``sum i Z_i = n``.

    The factors ``exp(-1/i)`` cancel in the conditioning, leaving a finite
    rational computation over the partitions of ``n``.
    """
    weights = {}
    for lam in partitions_of(n):
        c = CycleType.from_partition(lam, n)
        weights[lam] = prod((Fraction(1, i) ** ci / factorial(ci) for i, ci in enumerate(c.counts, 1)),
                            start=Fraction(1))
    total = sum(weights.values())
    return {lam: w / total for lam, w in weights.items()}


@dataclass
class PoissonCheck:
    n: int
    accepted: int
    draws: int
    tv_distance: float
    empirical: dict[Partition, float]

    def to_json(self) -> dict:
        return {"n": self.n, "accepted": self.accepted, "draws": self.draws,
                "tv_distance": self.tv_distance,
                "empirical": {str(k): v for k, v in sorted(self.empirical.items(), reverse=True)}}


def conditioned_poisson_check(n: int, trials: int, seed=None, max_draws: int = 10**8,
                              batch: int = 200_000) -> PoissonCheck:
    """Rejection-sample ``(Z_1, ..., Z_n)`` given ``sum i Z_i = n`` until ``trials`` acceptances."""
    rng = as_generator(seed)
    lam_rates = 1.0 / np.arange(1, n + 1)
    weights = np.arange(1, n + 1)
    counts: Counter = Counter()
    accepted = draws = 0
    while accepted < trials:
        if draws >= max_draws:
            raise BudgetError(f"only {accepted} of {trials} accepted after {draws} draws")
        z = rng.poisson(lam_rates, size=(batch, n))
        draws += batch
        ok = z[(z @ weights) == n][: trials - accepted]
        for row in map(tuple, ok):
            counts[row] += 1
        accepted += len(ok)
    exact = conditioned_poisson_exact(n)
    emp = {CycleType(row).partition(): c / accepted for row, c in counts.items()}
    tv = 0.5 * sum(abs(emp.get(lam, 0.0) - float(p)) for lam, p in exact.items())
    return PoissonCheck(n, accepted, draws, tv, emp)


# --- Young lattice --------------------------------------------------------

@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse lexicographic order."""
    def gen(rem, cap):
        if rem == 0:
            yield ()
            return
        for first in range(min(rem, cap), 0, -1):
            for rest in gen(rem - first, first):
                yield (first,) + rest
    return tuple(Partition(p) for p in gen(n, n))


def predecessors(lam: Partition) -> list[Partition]:
    """Partitions obtained by removing one corner box."""
    if lam.n < 2:
        raise PermutonError("a partition of 1 has no predecessor")
    out = []
    parts = lam.parts
    for i, p in enumerate(parts):
        if i + 1 == len(parts) or parts[i + 1] < p:
            new = parts[:i] + (p - 1,) + parts[i + 1:]
            out.append(Partition(tuple(x for x in new if x)))
    return out


def successors(lam: Partition) -> list[Partition]:
    """Partitions obtained by adding one box."""
    parts = lam.parts
    out = []
    for i in range(len(parts) + 1):
        cur = parts[i] if i < len(parts) else 0
        if i == 0 or parts[i - 1] > cur:
            new = list(parts) + ([0] if i == len(parts) else [])
            new[i] += 1
            out.append(Partition(tuple(new)))
    return out


def atom_removal_weights(lam: Partition) -> dict[Partition, Fraction]:
    """Cotransitions of the cycle-type chain: shrink a part ``p`` with weight ``p * m_p / n``."""
    if lam.n < 2:
        raise PermutonError("a partition of 1 has no predecessor")
    n = lam.n
    out = {}
    for p, mult in lam.multiplicities().items():
        i = lam.parts.index(p) + mult - 1  # the last copy keeps the result sorted
        new = lam.parts[:i] + (p - 1,) + lam.parts[i + 1:]
        out[Partition(tuple(x for x in new if x))] = Fraction(p * mult, n)
    return out


@lru_cache(maxsize=None)
def _paths(lam: Partition) -> int:
    if lam.n <= 1:
        return 1
    return sum(_paths(eta) for eta in predecessors(lam))


def dimension(lam: Partition, method: str = "hook") -> int:
    """Number of standard Young tableaux of shape ``lam``.

    ``method="paths"`` counts root-to-``lam`` paths in the Young lattice;
    ``method="hook"`` uses the hook-length formula.
    """
    if method == "paths":
        return _paths(lam)
    if method != "hook":
        raise PermutonError(f"unknown method {method!r}")
    conj = conjugate(lam).parts
    hooks = 1
    for i, row in enumerate(lam.parts):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return factorial(lam.n) // hooks


def conjugate(lam: Partition) -> Partition:
    if not lam.parts:
        return lam
    return Partition(tuple(sum(1 for p in lam.parts if p > j) for j in range(lam.parts[0])))


def thoma_coordinates(lam: Partition, length: int = 10, kind: str = "rows") -> BoundaryPoint:
    """Finite-``n`` approximation of the Thoma coordinates, padded or cut to ``length``.

    ``kind="rows"`` gives ``lam_i / n`` and ``lam*_i / n``. ``kind="frobenius"``
    gives ``(lam_i - i + 1/2) / n`` and ``(lam*_i - i + 1/2) / n`` over the
    diagonal boxes; these sum to exactly 1 and have the same limits.
    """
    n = lam.n
    conj = conjugate(lam).parts
    if kind == "rows":
        a, b = lam.parts, conj
    elif kind == "frobenius":
        d = sum(1 for i, p in enumerate(lam.parts, start=1) if p >= i)
        a = [lam.parts[i] - i - 0.5 for i in range(d)]
        b = [conj[i] - i - 0.5 for i in range(d)]
    else:
        raise PermutonError(f"unknown kind {kind!r}")

    def norm(parts):
        vals = [p / n for p in parts[:length]]
        return tuple(vals + [0.0] * (length - len(vals)))

    return BoundaryPoint(norm(a), norm(b))


def plancherel_row(lam: Partition) -> dict[Partition, Fraction]:
    d = dimension(lam)
    n = lam.n
    return {eta: Fraction(dimension(eta), (n + 1) * d) for eta in successors(lam)}


def plancherel_step(lam: Partition, seed=None) -> Partition:
    rng = as_generator(seed)
    row = plancherel_row(lam)
    keys = list(row)
    probs = np.array([float(row[k]) for k in keys])
    return keys[int(rng.choice(len(keys), p=probs / probs.sum()))]


def simulate_plancherel(n: int, seed=None) -> Trajectory:
    rng = as_generator(seed)
    lam = Partition((1,))
    traj = Trajectory("plancherel", [lam], [()], seed if isinstance(seed, int) else None)
    for _ in range(1, n):
        lam = plancherel_step(lam, rng)
        traj.steps.append(lam)
        traj.draws.append(())
    return traj


def plancherel_marginals(n: int) -> dict[Partition, Fraction]:
    """Exact law of the Plancherel growth process at level ``n`` by forward recursion."""
    law = {Partition((1,)): Fraction(1)}
    for _ in range(1, n):
        nxt: dict[Partition, Fraction] = defaultdict(Fraction)
        for lam, p in law.items():
            for eta, w in plancherel_row(lam).items():
                nxt[eta] += p * w
        law = dict(nxt)
    return law


def young_lattice_csv(n: int, weighting: str = "atom") -> str:
    """Edges up to level ``n`` as CSV ``parent,child,weight_num,weight_den``.

    ``weighting="atom"`` gives the atom-removal cotransition ``P(parent | child)``;
    ``weighting="plancherel"`` gives the forward probability ``P(child | parent)``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parent", "child", "weight_num", "weight_den"])
    for level in range(1, n):
        for parent in partitions_of(level):
            for child in successors(parent):
                if weighting == "atom":
                    wt = atom_removal_weights(child)[parent]
                elif weighting == "plancherel":
                    wt = Fraction(dimension(child), (level + 1) * dimension(parent))
                else:
                    raise PermutonError(f"unknown weighting {weighting!r}")
                w.writerow([str(parent), str(child), wt.numerator, wt.denominator])
    return buf.getvalue()


# --- Chinese restaurant process -----------------------------------------

def crp_step(p: Permutation, choice: int) -> Permutation:
    """Seat customer ``n + 1``.

    ``choice = j <= n`` puts ``n + 1`` directly before ``j`` in ``j``'s cycle
    (so ``n + 1`` maps to ``j``); ``choice = n + 1`` opens a new cycle.
    """
    n = p.n
    if not 1 <= choice <= n + 1:
        raise PermutonError(f"choice {choice} outside 1..{n + 1}")
    vals = list(p.values) + [n + 1]
    if choice <= n:
        pred = p.values.index(choice)
        vals[pred] = n + 1
        vals[n] = choice
    return Permutation(tuple(vals))


def simulate_crp(n: int, seed=None) -> Trajectory:
    rng = as_generator(seed)
    p = Permutation((1,))
    traj = Trajectory("crp", [p], [()], seed if isinstance(seed, int) else None)
    for m in range(1, n):
        j = int(rng.integers(1, m + 2))
        p = crp_step(p, j)
        traj.steps.append(p)
        traj.draws.append((j,))
    return traj


def enumerate_crp(n: int) -> dict[Permutation, Fraction]:
    """Exact law of the process at level ``n`` over all ``n!`` seating histories."""
    law = {Permutation((1,)): Fraction(1)}
    for m in range(1, n):
        w = Fraction(1, m + 1)
        nxt: dict[Permutation, Fraction] = defaultdict(Fraction)
        for p, pr in law.items():
            for j in range(1, m + 2):
                nxt[crp_step(p, j)] += pr * w
        law = dict(nxt)
    return law


def crp_table_sizes(n: int, reps: int, seed=None) -> np.ndarray:
    """Sorted cycle lengths of ``reps`` process runs at level ``n`` as a ragged object array.

    Uses the Feller coupling: scanning customers ``n, n-1, ..., 1``, customer
    ``i`` closes the current cycle with probability ``1/i``. The cycle lengths
    have the law of those of the process at level ``n``.
    """
    rng = as_generator(seed)
    i = np.arange(n, 0, -1)
    closes = rng.random((reps, n)) < 1.0 / i
    out = np.empty(reps, dtype=object)
    for r in range(reps):
        ends = np.flatnonzero(closes[r])
        lengths = np.diff(np.concatenate(([-1], ends)))
        out[r] = np.sort(lengths)[::-1]
    return out


def largest_cycle_fractions(n: int, reps: int, seed=None) -> np.ndarray:
    rng = as_generator(seed)
    i = np.arange(n, 0, -1)
    closes = rng.random((reps, n)) < 1.0 / i
    closes[:, -1] = True  # customer 1 always closes
    pos = np.where(closes, np.arange(n)[None, :], -1)
    last = np.maximum.accumulate(np.concatenate([np.full((reps, 1), -1), pos[:, :-1]], axis=1), axis=1)
    gaps = np.where(closes, np.arange(n)[None, :] - last, 0)
    return gaps.max(axis=1) / n


# --- stick breaking -------------------------------------------------------

def stick_lengths(count: int, seed=None) -> np.ndarray:
    """First ``count`` pieces ``V_1 = U_1``, ``V_{k+1} = (1 - V_1 - ... - V_k) U_{k+1}`` (unsorted)."""
    if count < 1:
        raise PermutonError("count must be >= 1")
    u = as_generator(seed).random(count)
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - u)[:-1]))
    return remaining * u


def stick_breaking(count: int, seed=None) -> BoundaryPoint:
    v = np.sort(stick_lengths(count, seed))[::-1]
    return BoundaryPoint(tuple(float(x) for x in v))


def largest_stick(reps: int, count: int = 64, seed=None) -> np.ndarray:
    """Largest of the first ``count`` sticks in ``reps`` draws.

    With ``count = 64`` the unbroken remainder has expected length ``2^-64``.
    """
    u = as_generator(seed).random((reps, count))
    remaining = np.concatenate([np.ones((reps, 1)), np.cumprod(1.0 - u, axis=1)[:, :-1]], axis=1)
    return (remaining * u).max(axis=1)
