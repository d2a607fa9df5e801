"""Growth chains on permutations: single insertion (F), double insertion (H),
and the chain generated by iid samples from a copula.

All exact kernels are ``Fraction`` valued.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Any

import numpy as np

from .copulas import Copula, pattern_law_exact, pattern_law_mc
from .errors import PermutonError
from .patterns import all_permutations, pattern_frequency, perm_index
from .perm import Permutation
from .rng import as_generator


@dataclass
class Trajectory:
    """``steps[i]`` is the state at level ``i + 1``; ``draws[i]`` produced it."""

    model: str
    steps: list[Permutation]
    draws: list[Any] = field(default_factory=list)
    seed: int | None = None

    @property
    def final(self) -> Permutation:
        return self.steps[-1]

    def __len__(self) -> int:
        return len(self.steps)

    def to_jsonl(self) -> str:
        lines = []
        for i, (p, d) in enumerate(zip(self.steps, self.draws), start=1):
            draw = [float(x) if isinstance(x, (float, np.floating)) else int(x) for x in d] if d else None
            lines.append(json.dumps({"n": i, "perm": str(p), "draw": draw}, sort_keys=True))
        return "\n".join(lines) + "\n"


def step_F(p: Permutation, i: int) -> Permutation:
    """Insert the new maximum ``n + 1`` in front of position ``i`` (``i = n + 1`` appends)."""
    n = p.n
    if not 1 <= i <= n + 1:
        raise PermutonError(f"gap {i} outside 1..{n + 1}")
    v = p.values
    return Permutation(v[:i - 1] + (n + 1,) + v[i - 1:])


def step_H(p: Permutation, i: int, j: int) -> Permutation:
    """Insert value ``j`` at position ``i``, shifting values ``>= j`` up by one."""
    n = p.n
    if not (1 <= i <= n + 1 and 1 <= j <= n + 1):
        raise PermutonError(f"(I, J) = ({i}, {j}) outside 1..{n + 1}")
    shifted = tuple(v + 1 if v >= j else v for v in p.values)
    return Permutation(shifted[:i - 1] + (j,) + shifted[i - 1:])


def simulate_F(n: int, seed=None) -> Trajectory:
    rng = as_generator(seed)
    p = Permutation((1,))
    traj = Trajectory("F", [p], [()], seed if isinstance(seed, int) else None)
    for m in range(1, n):
        i = int(rng.integers(1, m + 2))
        p = step_F(p, i)
        traj.steps.append(p)
        traj.draws.append((i,))
    return traj


def simulate_H(n: int, seed=None) -> Trajectory:
    rng = as_generator(seed)
    p = Permutation((1,))
    traj = Trajectory("H", [p], [()], seed if isinstance(seed, int) else None)
    for m in range(1, n):
        i, j = (int(x) for x in rng.integers(1, m + 2, size=2))
        p = step_H(p, i, j)
        traj.steps.append(p)
        traj.draws.append((i, j))
    return traj


def _enumerate(n: int, moves, step) -> dict[Permutation, Fraction]:
    law = {Permutation((1,)): Fraction(1)}
    for m in range(1, n):
        opts = moves(m)
        w = Fraction(1, len(opts))
        nxt: dict[Permutation, Fraction] = defaultdict(Fraction)
        for p, pr in law.items():
            for mv in opts:
                nxt[step(p, *mv)] += pr * w
        law = dict(nxt)
    return law


def enumerate_F(n: int) -> dict[Permutation, Fraction]:
    """Exact law of the F chain at level ``n`` over all ``n!`` gap histories."""
    return _enumerate(n, lambda m: [(i,) for i in range(1, m + 2)], step_F)


def enumerate_H(n: int) -> dict[Permutation, Fraction]:
    """Exact law of the H chain at level ``n`` over all ``(n!)^2`` (I, J) histories."""
    return _enumerate(n, lambda m: list(product(range(1, m + 2), repeat=2)), step_H)


def one_step_row_H(sigma: Permutation) -> dict[Permutation, Fraction]:
    """One-step H transitions from ``sigma`` by enumerating the ``(n+1)^2`` moves."""
    m = sigma.n + 1
    row: dict[Permutation, Fraction] = defaultdict(Fraction)
    w = Fraction(1, m * m)
    for i, j in product(range(1, m + 1), repeat=2):
        row[step_H(sigma, i, j)] += w
    return dict(row)


def composed_transition_H(sigma: Permutation, n: int) -> dict[Permutation, Fraction]:
    """``P(H_n = . | H_k = sigma)`` by composing one-step rows."""
    law = {sigma: Fraction(1)}
    for _ in range(sigma.n, n):
        nxt: dict[Permutation, Fraction] = defaultdict(Fraction)
        for p, pr in law.items():
            for q, w in one_step_row_H(p).items():
                nxt[q] += pr * w
        law = dict(nxt)
    return law


def transition_H(sigma: Permutation, tau: Permutation) -> Fraction:
    """``P(H_n = tau | H_k = sigma) = k!/n! * t(sigma, tau)``."""
    k, n = sigma.n, tau.n
    if k > n:
        raise PermutonError("need |sigma| <= |tau|")
    return Fraction(factorial(k), factorial(n)) * pattern_frequency(sigma, tau)


def cotransition_H(sigma: Permutation, tau: Permutation) -> Fraction:
    """``P(H_n = sigma | H_{n+1} = tau) = t(sigma, tau)``."""
    if tau.n != sigma.n + 1:
        raise PermutonError("need |tau| = |sigma| + 1")
    return pattern_frequency(sigma, tau)


def _copula_t(c: Copula, k: int, m: int | None, seed):
    try:
        return pattern_law_exact(c, k).probs
    except PermutonError:
        if m is None:
            raise PermutonError(f"{c.name} has no exact pattern law; supply an MC budget m")
        return pattern_law_mc(c, k, m, seed).probs


def martin_kernel(sigma: Permutation, target, m: int | None = None, seed=None):
    """``K(sigma, .) = k! t(sigma, .)`` against a permutation or a copula."""
    k = sigma.n
    if isinstance(target, Permutation):
        return factorial(k) * pattern_frequency(sigma, target)
    if isinstance(target, Copula):
        probs = _copula_t(target, k, m, seed)
        return factorial(k) * probs[perm_index(sigma)]
    raise PermutonError("target must be a Permutation or a Copula")


def h_transform_row(sigma: Permutation, c: Copula, m: int | None = None, seed=None
                    ) -> dict[Permutation, Any]:
    """One-step law of the chain generated by ``c``, as an h-transform of H.

    ``P(tau | sigma) = (n + 1) t(tau, C) / t(sigma, C) * p_H(sigma, tau)``.
    Exact for copulas with a closed-form pattern law; otherwise ``m`` Monte
    Carlo draws per level estimate ``t(., C)``.
    """
    n = sigma.n
    t_n = _copula_t(c, n, m, seed)
    t_sigma = t_n[perm_index(sigma)]
    if t_sigma == 0:
        raise PermutonError(f"t({sigma.word()}, {c.name}) = 0; state unreachable")
    t_next = _copula_t(c, n + 1, m, None if seed is None else seed + 1)
    row = {}
    for tau, tt in zip(all_permutations(n + 1), t_next):
        if tt == 0:
            continue
        ph = Fraction(1, n + 1) * pattern_frequency(sigma, tau)
        if ph:
            row[tau] = (n + 1) * tt / t_sigma * ph
    return row


def _insert_rank(prev: list[float], v: float, rng, ties: str) -> int:
    below = sum(1 for u in prev if u < v)
    equal = sum(1 for u in prev if u == v)
    if equal:
        if ties == "strict":
            raise PermutonError("tie in copula sample")
        below += int(rng.integers(0, equal + 1))
    return below + 1


def simulate_copula_chain(c: Copula, n: int, seed=None, ties: str = "random") -> Trajectory:
    """Permutations of the prefixes of an iid sample from ``c``.

    Each new pair enters at x-rank ``I`` and y-rank ``J`` among the pairs so
    far, so consecutive states differ by one double insertion ``step_H(., I, J)``.
    """
    rng = as_generator(seed)
    pts = c.sample(n, rng)
    xs: list[float] = []
    ys: list[float] = []
    p = None
    traj = Trajectory(f"copula:{c.name}", [], [], seed if isinstance(seed, int) else None)
    for x, y in pts:
        i = _insert_rank(xs, x, rng, ties)
        j = _insert_rank(ys, y, rng, ties)
        xs.append(x)
        ys.append(y)
        p = Permutation((1,)) if p is None else step_H(p, i, j)
        traj.steps.append(p)
        traj.draws.append((float(x), float(y), i, j))
    return traj
