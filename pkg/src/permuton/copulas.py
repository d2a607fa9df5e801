"""Copulas (permutons) as samplers, and their pattern laws ``t(sigma, C)``.

Sampling is the one capability every copula has. A closed-form ``cdf`` and the
conditional quantile ``W(x, y)`` (the quantile function of the second
coordinate given the first) are optional; ``has("cdf")`` tells which exist.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable

import numpy as np

from .errors import PermutonError, TieError
from .patterns import all_permutations, perm_index
from .perm import Permutation, identity
from .rng import as_generator

MC_CHUNK = 50_000


class Copula:
    name = "copula"

    def sample(self, m: int, seed=None) -> np.ndarray:
        """``m`` independent draws as an ``(m, 2)`` array."""
        raise NotImplementedError

    def cdf(self, u, v):
        raise NotImplementedError(f"{self.name} has no closed-form cdf")

    def conditional_quantile(self, x, y):
        raise NotImplementedError(f"{self.name} has no conditional quantile")

    def has(self, capability: str) -> bool:
        method = getattr(type(self), capability, None)
        return method is not None and method is not getattr(Copula, capability, None)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class IndependenceCopula(Copula):
    name = "independence"

    def sample(self, m, seed=None):
        return as_generator(seed).random((m, 2))

    def cdf(self, u, v):
        return np.asarray(u) * np.asarray(v)

    def conditional_quantile(self, x, y):
        return np.broadcast_to(np.asarray(y, dtype=float), np.broadcast(x, y).shape).copy()


class MinCopula(Copula):
    """Comonotone copula ``C(u, v) = min(u, v)``; all mass on the diagonal."""

    name = "min"

    def sample(self, m, seed=None):
        u = as_generator(seed).random(m)
        return np.column_stack([u, u])

    def cdf(self, u, v):
        return np.minimum(u, v)

    def conditional_quantile(self, x, y):
        return np.broadcast_to(np.asarray(x, dtype=float), np.broadcast(x, y).shape).copy()


class CountermonotoneCopula(Copula):
    name = "countermonotone"

    def sample(self, m, seed=None):
        u = as_generator(seed).random(m)
        return np.column_stack([u, 1.0 - u])

    def cdf(self, u, v):
        return np.maximum(np.asarray(u) + np.asarray(v) - 1.0, 0.0)

    def conditional_quantile(self, x, y):
        return np.broadcast_to(1.0 - np.asarray(x, dtype=float), np.broadcast(x, y).shape).copy()


class ConditionalQuantileCopula(Copula):
    """Copula given by ``(U, W(U, V))`` with ``U, V`` independent uniforms.

    ``W`` should accept numpy arrays; scalar-only callables are vectorized.
    """

    def __init__(self, w: Callable, name: str = "conditional-quantile"):
        self.w = w
        self.name = name

    def _apply(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        try:
            out = np.asarray(self.w(x, y), dtype=float)
            if out.shape != np.broadcast(x, y).shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.vectorize(self.w, otypes=[float])(x, y)
        if np.any((out < 0) | (out > 1)) or np.any(np.isnan(out)):
            raise PermutonError(f"{self.name}: W returned values outside [0, 1]")
        return out

    def sample(self, m, seed=None):
        uv = as_generator(seed).random((m, 2))
        return np.column_stack([uv[:, 0], self._apply(uv[:, 0], uv[:, 1])])

    def conditional_quantile(self, x, y):
        return self._apply(x, y)


class DelayCopula(Copula):
    """Copula of (arrival, departure) with uniform arrivals and iid delays.

    The departure coordinate ``U + X`` is mapped through its own distribution
    function ``F(t) = H(t) - H(t - 1)``, where ``H`` integrates the delay cdf.
    """

    def __init__(self, service):
        self.service = service
        self.name = f"delay:{service.label()}"

    def departure_cdf(self, t):
        t = np.asarray(t, dtype=float)
        h = self.service.integrated_cdf
        return np.clip(h(t) - h(t - 1.0), 0.0, 1.0)

    def sample(self, m, seed=None):
        rng = as_generator(seed)
        u = rng.random(m)
        d = u + self.service.sample(m, rng)
        return np.column_stack([u, self.departure_cdf(d)])


_BUILTIN = {
    "independence": IndependenceCopula,
    "min": MinCopula,
    "countermonotone": CountermonotoneCopula,
}


def independence_copula() -> Copula:
    return IndependenceCopula()


def min_copula() -> Copula:
    return MinCopula()


def from_conditional_quantile(w: Callable, name: str = "conditional-quantile") -> Copula:
    return ConditionalQuantileCopula(w, name)


def copula_by_name(name: str) -> Copula:
    """``independence``, ``min``, ``countermonotone`` or ``delay:<service spec>``."""
    if name in _BUILTIN:
        return _BUILTIN[name]()
    if name.startswith("delay:"):
        from .queues import ServiceDist
        return DelayCopula(ServiceDist.parse(name.split(":", 1)[1]))
    raise PermutonError(f"unknown copula {name!r}")


# --- pattern laws --------------------------------------------------------

@dataclass(frozen=True)
class PatternLaw:
    """``t(sigma, C)`` over ``S_k``, aligned with ``all_permutations(k)``."""

    k: int
    mode: str  # "exact" or "mc"
    probs: tuple
    se: tuple | None = None
    m: int | None = None

    def prob(self, sigma: Permutation):
        return self.probs[perm_index(sigma)]

    def to_json(self) -> dict:
        words = [s.word() for s in all_permutations(self.k)]
        out = {
            "k": self.k,
            "mode": self.mode,
            "m": self.m,
            "probs": {w: (str(p) if isinstance(p, Fraction) else float(p))
                      for w, p in zip(words, self.probs)},
        }
        out["se"] = ({w: float(s) for w, s in zip(words, self.se)}
                     if self.se is not None else {w: 0.0 for w in words})
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def pattern_law_exact(c: Copula, k: int) -> PatternLaw:
    """Exact law for the copulas where it is known in closed form."""
    perms = all_permutations(k)
    if isinstance(c, IndependenceCopula):
        probs = tuple(Fraction(1, factorial(k)) for _ in perms)
    elif isinstance(c, MinCopula):
        probs = tuple(Fraction(int(s == identity(k))) for s in perms)
    elif isinstance(c, CountermonotoneCopula):
        rev = Permutation(tuple(range(k, 0, -1)))
        probs = tuple(Fraction(int(s == rev)) for s in perms)
    else:
        raise PermutonError(f"no exact pattern law for {c.name}")
    return PatternLaw(k, "exact", probs)


def lehmer_index(words: np.ndarray) -> np.ndarray:
    """Lexicographic index of the pattern of each row (rows of distinct values)."""
    words = np.asarray(words)
    k = words.shape[-1]
    idx = np.zeros(words.shape[:-1], dtype=np.int64)
    for i in range(k):
        smaller_right = (words[..., i + 1:] < words[..., i:i + 1]).sum(axis=-1)
        idx += smaller_right * factorial(k - 1 - i)
    return idx


def _order(v: np.ndarray, ties: str, rng) -> np.ndarray:
    s = np.sort(v, axis=-1)
    tied = (np.diff(s, axis=-1) == 0).any()
    if not tied:
        return np.argsort(v, axis=-1)
    if ties == "strict":
        raise TieError("tie inside a Monte Carlo draw")
    return np.lexsort((rng.random(v.shape), v), axis=-1)


def sample_patterns(c: Copula, k: int, m: int, seed=None, ties: str = "random") -> np.ndarray:
    """Pattern indices of ``m`` independent ``k``-samples from ``c``."""
    rng = as_generator(seed)
    out = np.empty(m, dtype=np.int64)
    done = 0
    while done < m:
        b = min(MC_CHUNK, m - done)
        pts = c.sample(b * k, rng).reshape(b, k, 2)
        ox = _order(pts[:, :, 0], ties, rng)
        ys = np.take_along_axis(pts[:, :, 1], ox, axis=1)
        oy = _order(ys, ties, rng)
        word = np.empty_like(oy)
        np.put_along_axis(word, oy, np.arange(k)[None, :].repeat(b, 0), axis=1)
        out[done:done + b] = lehmer_index(word)
        done += b
    return out


def pattern_law_mc(c: Copula, k: int, m: int, seed=None, ties: str = "random") -> PatternLaw:
    """Empirical pattern frequencies of ``m`` draws with binomial standard errors."""
    if m < 1:
        raise PermutonError("m must be >= 1")
    idx = sample_patterns(c, k, m, seed, ties)
    p = np.bincount(idx, minlength=factorial(k)) / m
    se = np.sqrt(p * (1 - p) / m)
    return PatternLaw(k, "mc", tuple(float(x) for x in p), tuple(float(x) for x in se), m)
