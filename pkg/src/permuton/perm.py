"""Permutations of ``[n] = {1, ..., n}`` and the bivariate-data views on them.

Everything public is 1-based: ``Permutation((3, 1, 2))`` maps 1 -> 3, 2 -> 1,
3 -> 2, which is the one-line notation ``312``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PermutonError, TieError
from .rng import as_generator

__all__ = [
    "Permutation", "CycleForm", "BivariateSample", "ZArray",
    "identity", "compose", "invert", "to_cycles", "from_cycles",
    "foata", "foata_inverse", "order_restrict", "cycle_restrict",
    "pattern_of", "standardize", "ranks", "direct_sum", "skew_sum",
    "perm_matrix", "empirical_measure", "z_encode", "z_decode",
]


@dataclass(frozen=True)
class Permutation:
    """A bijection of ``[n]`` in one-line notation."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise PermutonError("a permutation needs n >= 1")
        if sorted(vals) != list(range(1, len(vals) + 1)):
            raise PermutonError(f"not a permutation of 1..{len(vals)}: {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        """Parse ``"3,1,2"``; a bare digit string such as ``"312"`` is accepted for n < 10."""
        text = text.strip()
        try:
            if "," in text:
                return cls(tuple(int(t) for t in text.split(",")))
            if " " in text:
                return cls(tuple(int(t) for t in text.split()))
            return cls(tuple(int(c) for c in text))
        except ValueError as exc:
            raise PermutonError(f"cannot parse permutation {text!r}") from exc

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __str__(self) -> str:
        return ",".join(map(str, self.values))

    def word(self) -> str:
        """Compact one-line word, e.g. ``2413``; separators are used once n > 9."""
        if self.n < 10:
            return "".join(map(str, self.values))
        return str(self)


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """``p o q``, i.e. ``i -> p(q(i))``."""
    if p.n != q.n:
        raise PermutonError(f"size mismatch: {p.n} vs {q.n}")
    pv = p.values
    return Permutation(tuple(pv[j - 1] for j in q.values))


def invert(p: Permutation) -> Permutation:
    inv = [0] * p.n
    for i, v in enumerate(p.values, start=1):
        inv[v - 1] = i
    return Permutation(tuple(inv))


@dataclass(frozen=True)
class CycleForm:
    """Standard cycle notation.

    Cycles are rotated to start with their largest element and sorted by that
    element on construction, so two equal permutations always give equal
    ``CycleForm`` objects.
    """

    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cycles = [tuple(int(v) for v in c) for c in self.cycles]
        if any(len(c) == 0 for c in cycles):
            raise PermutonError("empty cycle")
        flat = [v for c in cycles for v in c]
        if not flat or sorted(flat) != list(range(1, len(flat) + 1)):
            raise PermutonError(f"cycles do not partition 1..{len(flat)}: {self.cycles}")
        std = []
        for c in cycles:
            m = c.index(max(c))
            std.append(c[m:] + c[:m])
        std.sort(key=lambda c: c[0])
        object.__setattr__(self, "cycles", tuple(std))

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.cycles)

    def __str__(self) -> str:
        sep = "" if self.n < 10 else " "
        return "".join("(" + sep.join(map(str, c)) + ")" for c in self.cycles)


def to_cycles(p: Permutation) -> CycleForm:
    seen = [False] * (p.n + 1)
    cycles = []
    for start in range(1, p.n + 1):
        if seen[start]:
            continue
        c = []
        i = start
        while not seen[i]:
            seen[i] = True
            c.append(i)
            i = p(i)
        cycles.append(tuple(c))
    return CycleForm(tuple(cycles))


def from_cycles(c: CycleForm | Sequence[Sequence[int]]) -> Permutation:
    if not isinstance(c, CycleForm):
        c = CycleForm(tuple(tuple(x) for x in c))
    vals = [0] * c.n
    for cyc in c.cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            vals[a - 1] = b
    return Permutation(tuple(vals))


def foata(p: Permutation) -> Permutation:
    """Read the one-line word of ``p`` as a standard cycle notation.

    Brackets open in front of every left-to-right maximum, so ``587324916``
    becomes ``(5)(87324)(916)``.
    """
    cycles = []
    record = 0
    for v in p.values:
        if v > record:
            cycles.append([v])
            record = v
        else:
            cycles[-1].append(v)
    return from_cycles(CycleForm(tuple(tuple(c) for c in cycles)))


def foata_inverse(q: Permutation) -> Permutation:
    """Erase the brackets of the standard cycle notation of ``q``."""
    return Permutation(tuple(v for c in to_cycles(q).cycles for v in c))


def _check_k(p: Permutation, k: int) -> None:
    if not 1 <= k <= p.n:
        raise PermutonError(f"k={k} outside 1..{p.n}")


def order_restrict(p: Permutation, k: int) -> Permutation:
    """Delete all entries greater than ``k`` from the one-line notation."""
    _check_k(p, k)
    return Permutation(tuple(v for v in p.values if v <= k))


def cycle_restrict(p: Permutation, k: int) -> Permutation:
    """Delete all values greater than ``k`` from the cycle notation."""
    _check_k(p, k)
    out = []
    for i in range(1, k + 1):
        j = p(i)
        while j > k:
            j = p(j)
        out.append(j)
    return Permutation(tuple(out))


def standardize(values: Sequence) -> tuple[int, ...]:
    """Relabel distinct comparable values by their ranks 1..k."""
    order = sorted(range(len(values)), key=values.__getitem__)
    out = [0] * len(values)
    for r, i in enumerate(order, start=1):
        out[i] = r
    return tuple(out)


def pattern_of(p: Permutation, positions: Iterable[int]) -> Permutation:
    pos = tuple(positions)
    if not pos or any(b <= a for a, b in zip(pos, pos[1:])) or pos[0] < 1 or pos[-1] > p.n:
        raise PermutonError(f"positions must be strictly increasing within 1..{p.n}: {pos}")
    return Permutation(standardize([p(i) for i in pos]))


def direct_sum(p: Permutation, q: Permutation) -> Permutation:
    k = p.n
    return Permutation(p.values + tuple(v + k for v in q.values))


def skew_sum(p: Permutation, q: Permutation) -> Permutation:
    m = q.n
    return Permutation(tuple(v + m for v in p.values) + q.values)


def perm_matrix(p: Permutation) -> np.ndarray:
    """``M[i-1, j-1] = 1`` iff ``p(j) = i``; then ``M(p o q) = M(p) M(q)``."""
    m = np.zeros((p.n, p.n), dtype=np.int64)
    m[np.asarray(p.values) - 1, np.arange(p.n)] = 1
    return m


def empirical_measure(p: Permutation) -> tuple[np.ndarray, np.ndarray]:
    """Support points ``(i/n, p(i)/n)`` and their masses ``1/n``."""
    n = p.n
    i = np.arange(1, n + 1)
    pts = np.column_stack([i / n, np.asarray(p.values) / n])
    return pts, np.full(n, 1.0 / n)


# --- bivariate data -------------------------------------------------------

@dataclass(frozen=True)
class BivariateSample:
    """Paired observations ``(x_i, y_i)``; row order is the observation order."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        y = np.asarray(self.y, dtype=float).copy()
        if x.ndim != 1 or x.shape != y.shape:
            raise PermutonError("x and y must be 1-d of equal length")
        if x.size == 0:
            raise PermutonError("empty sample")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "BivariateSample":
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self) -> int:
        return int(self.x.size)

    def __len__(self) -> int:
        return self.n

    def reorder(self, order: Sequence[int]) -> "BivariateSample":
        idx = np.asarray(order)
        return BivariateSample(self.x[idx], self.y[idx])

    def has_ties(self) -> bool:
        return len(np.unique(self.x)) < self.n or len(np.unique(self.y)) < self.n

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for a, b in zip(self.x, self.y):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()

    @classmethod
    def read_csv(cls, source: str | Path | io.TextIOBase) -> "BivariateSample":
        """Read a ``x,y`` CSV; parse errors name the offending line."""
        if isinstance(source, (str, Path)):
            with open(source, newline="", encoding="utf-8") as fh:
                return cls._parse(fh)
        return cls._parse(source)

    @classmethod
    def _parse(cls, fh) -> "BivariateSample":
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y"]:
            raise PermutonError(f"line 1: expected header 'x,y', got {header!r}")
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise PermutonError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                xs.append(float(row[0]))
                ys.append(float(row[1]))
            except ValueError as exc:
                raise PermutonError(f"line {lineno}: {exc}") from exc
        if not xs:
            raise PermutonError("no data rows")
        return cls(np.array(xs), np.array(ys))


def _rank_vector(v: np.ndarray, ties: str, rng) -> np.ndarray:
    if ties == "strict":
        if len(np.unique(v)) < v.size:
            raise TieError("tied values; pass ties='random' to break them at random")
        order = np.argsort(v, kind="stable")
    elif ties == "random":
        order = np.lexsort((rng.random(v.size), v))
    else:
        raise PermutonError(f"unknown tie policy {ties!r}")
    r = np.empty(v.size, dtype=np.int64)
    r[order] = np.arange(1, v.size + 1)
    return r


def ranks(data: BivariateSample, ties: str = "strict", seed=None
          ) -> tuple[Permutation, Permutation, Permutation]:
    """Return ``(pi_x, pi_y, pi_y o pi_x^{-1})`` for the sample.

    ``pi_x(i)`` is the rank of ``x_i``. The third permutation sends the
    x-rank of an observation to its y-rank, so it does not depend on the
    row order of ``data``.
    """
    rng = as_generator(seed) if ties == "random" else None
    px = Permutation(tuple(_rank_vector(data.x, ties, rng)))
    py = Permutation(tuple(_rank_vector(data.y, ties, rng)))
    return px, py, compose(py, invert(px))


# --- Z-array -------------------------------------------------------------

@dataclass(frozen=True)
class ZArray:
    """Pairwise order indicators of a sample.

    For ``i < j`` the entry ``Z[i, j]`` is 1 iff ``y_i < y_j``; for ``i > j``
    it is 1 iff ``x_j < x_i``. Indices here are 1-based as in ``z[i, j]``.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.asarray(self.entries, dtype=np.uint8).copy()
        if z.ndim != 2 or z.shape[0] != z.shape[1] or z.shape[0] == 0:
            raise PermutonError("Z must be a non-empty square matrix")
        z.setflags(write=False)
        object.__setattr__(self, "entries", z)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return int(self.entries[i - 1, j - 1])

    def corner(self, m: int) -> np.ndarray:
        return self.entries[:m, :m].copy()


def _z_from_ranks(rx: np.ndarray, ry: np.ndarray) -> np.ndarray:
    upper = (ry[:, None] < ry[None, :])
    lower = (rx[None, :] < rx[:, None])
    n = rx.size
    iu = np.triu(np.ones((n, n), dtype=bool), 1)
    return np.where(iu, upper, np.where(iu.T, lower, False)).astype(np.uint8)


def z_encode(data: BivariateSample, ties: str = "strict", seed=None) -> ZArray:
    px, py, _ = ranks(data, ties=ties, seed=seed)
    return ZArray(_z_from_ranks(np.asarray(px.values), np.asarray(py.values)))


def z_decode(z: ZArray) -> Permutation:
    """Recover the order-relating permutation from a Z-array.

    Raises ``PermutonError`` if ``z`` is not the array of any tie-free sample.
    """
    e = z.entries.astype(np.int64)
    n = z.n
    if np.any(np.diag(e) != 0) or np.any(e > 1):
        raise PermutonError("Z must be binary with zero diagonal")
    up = np.triu(e, 1)
    lo = np.tril(e, -1)
    # x_i < x_j for i < j is lo[j, i]; for i > j it is 1 - lo[i, j]
    above_j = n - 1 - np.arange(n)
    rx = 1 + lo.sum(axis=1) + above_j - lo.sum(axis=0)
    ry = 1 + up.sum(axis=0) + above_j - up.sum(axis=1)
    if sorted(rx) != list(range(1, n + 1)) or sorted(ry) != list(range(1, n + 1)):
        raise PermutonError("Z is not realizable by any tie-free sample")
    if not np.array_equal(_z_from_ranks(rx, ry), z.entries):
        raise PermutonError("Z is not realizable by any tie-free sample")
    px = Permutation(tuple(rx))
    py = Permutation(tuple(ry))
    return compose(py, invert(px))
