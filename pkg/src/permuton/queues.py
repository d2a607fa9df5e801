"""Permutations generated by delays and by a single-server queue.

Customers are numbered in arrival order; the permutation of the first ``n``
customers sends arrival rank ``i`` to the departure rank of customer ``i``.
Under FIFO service this is always the identity, so the simulator also offers
LIFO (non-preemptive), preemptive-resume LIFO (``lifo-pr``, a stack of tickets)
and random order of service. Inversions stay inside busy periods under every
work-conserving discipline.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import inf

import numpy as np

from .errors import PermutonError
from .patterns import count_patterns_fast
from .perm import BivariateSample, Permutation, ranks, standardize
from .rng import as_generator

DISCIPLINES = ("fifo", "lifo", "lifo-pr", "random")


@dataclass(frozen=True)
class ServiceDist:
    """Service or delay distribution.

    ``kind`` is ``det`` (constant ``a``), ``exp`` (rate ``a``) or ``pareto``
    (shape ``a``, scale ``b``, support ``[b, inf)``).
    """

    kind: str
    a: float
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("det", "exp", "pareto"):
            raise PermutonError(f"unknown service kind {self.kind!r}")
        if self.a <= 0 or self.b <= 0:
            raise PermutonError("service parameters must be positive")

    @classmethod
    def parse(cls, spec: str) -> "ServiceDist":
        """``det:0.5``, ``exp:1`` or ``pareto:2.5`` / ``pareto:2.5,0.4``."""
        try:
            kind, _, params = spec.partition(":")
            vals = [float(v) for v in params.split(",")] if params else [1.0]
        except ValueError as exc:
            raise PermutonError(f"bad service spec {spec!r}") from exc
        aliases = {"deterministic": "det", "exponential": "exp"}
        return cls(aliases.get(kind, kind), *vals)

    def label(self) -> str:
        return f"{self.kind}:{self.a:g}" + (f",{self.b:g}" if self.kind == "pareto" else "")

    @property
    def mean(self) -> float:
        if self.kind == "det":
            return self.a
        if self.kind == "exp":
            return 1.0 / self.a
        return self.a * self.b / (self.a - 1) if self.a > 1 else inf

    @property
    def third_moment(self) -> float:
        if self.kind == "det":
            return self.a ** 3
        if self.kind == "exp":
            return 6.0 / self.a ** 3
        return self.a * self.b ** 3 / (self.a - 3) if self.a > 3 else inf

    @property
    def finite_third_moment(self) -> bool:
        return self.third_moment < inf

    def sample(self, m: int, seed=None) -> np.ndarray:
        rng = as_generator(seed)
        if self.kind == "det":
            return np.full(m, self.a)
        if self.kind == "exp":
            return rng.exponential(1.0 / self.a, m)
        return self.b * (1.0 - rng.random(m)) ** (-1.0 / self.a)

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "det":
            return (s >= self.a).astype(float)
        if self.kind == "exp":
            return np.where(s > 0, -np.expm1(-self.a * np.maximum(s, 0)), 0.0)
        return np.where(s >= self.b, 1.0 - (self.b / np.maximum(s, self.b)) ** self.a, 0.0)

    def integrated_cdf(self, s):
        """``H(s) = integral of cdf over [0, s]``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "det":
            return np.maximum(s - self.a, 0.0)
        if self.kind == "exp":
            sp = np.maximum(s, 0.0)
            return sp + np.expm1(-self.a * sp) / self.a
        al, sc = self.a, self.b
        sp = np.maximum(s, sc)
        if al == 1.0:
            tail = sc * np.log(sp / sc)
        else:
            tail = sc ** al * (sp ** (1 - al) - sc ** (1 - al)) / (1 - al)
        return (sp - sc) - tail


@dataclass(frozen=True)
class QueueTrace:
    """Event-driven trace of a single-server queue, customers in arrival order."""

    arrivals: np.ndarray
    services: np.ndarray
    departures: np.ndarray
    starts: np.ndarray  # first time each customer enters service
    period: np.ndarray  # busy period id (0-based) per customer
    service_order: np.ndarray  # customer indices in order of first entering service
    discipline: str
    n: int  # customers requested; the trace runs until that customer's period ends

    @property
    def size(self) -> int:
        return int(self.arrivals.size)

    @property
    def busy_periods(self) -> list[range]:
        """Customer index ranges (0-based, half-open) of the busy periods."""
        bounds = np.flatnonzero(np.diff(self.period)) + 1
        edges = [0, *bounds.tolist(), self.size]
        return [range(a, b) for a, b in zip(edges, edges[1:])]

    @property
    def K(self) -> np.ndarray:
        return np.bincount(self.period)

    def check_dynamics(self, rtol: float = 1e-9) -> bool:
        """Work conservation and, for non-preemptive disciplines, the start recursion.

        For FIFO this is ``d_i = max(a_i, d_{i-1}) + s_i``.
        """
        a, s, d = self.arrivals, self.services, self.departures
        if np.any(d < a + s * (1 - rtol)):
            return False
        if self.discipline != "lifo-pr":
            prev = -inf
            for i in self.service_order:
                st = max(a[i], prev)
                if not np.isclose(d[i], st + s[i], rtol=rtol, atol=1e-12):
                    return False
                prev = d[i]
        for r in self.busy_periods:
            idx = np.arange(r.start, r.stop)
            if not np.isclose(d[idx].max(), a[r.start] + s[idx].sum(), rtol=rtol, atol=1e-9):
                return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arrival", "departure", "busy_period_id"])
        for a, d, p in zip(self.arrivals, self.departures, self.period):
            w.writerow([repr(float(a)), repr(float(d)), int(p)])
        return buf.getvalue()


class _Arrivals:
    """Lazily generated Poisson arrivals with their service requirements."""

    def __init__(self, lam, service, rng, block=1024):
        self.lam, self.service, self.rng, self.block = lam, service, rng, block
        self.times: list[float] = []
        self.work: list[float] = []
        self.last = 0.0

    def __getitem__(self, i):
        while i >= len(self.times):
            gaps = self.rng.exponential(1.0 / self.lam, self.block)
            t = self.last + np.cumsum(gaps)
            self.last = float(t[-1])
            self.times.extend(t.tolist())
            self.work.extend(self.service.sample(self.block, self.rng).tolist())
        return self.times[i], self.work[i]


def simulate_mg1(lam: float, service: ServiceDist, n: int, seed=None,
                 discipline: str = "fifo", allow_unstable: bool = False) -> QueueTrace:
    """Simulate an M/G/1 queue from empty until the busy period of customer ``n`` ends."""
    if lam <= 0:
        raise PermutonError("arrival rate must be positive")
    if n < 1:
        raise PermutonError("n must be >= 1")
    if discipline not in DISCIPLINES:
        raise PermutonError(f"discipline must be one of {DISCIPLINES}")
    if lam * service.mean >= 1 and not allow_unstable:
        raise PermutonError(f"traffic intensity {lam * service.mean:.3g} >= 1")
    rng = as_generator(seed)
    arr = _Arrivals(lam, service, rng)
    dep: dict[int, float] = {}
    start: dict[int, float] = {}
    period: list[int] = []
    order: list[int] = []
    waiting: deque[int] = deque()
    remaining: dict[int, float] = {}
    nxt = 0  # next customer to arrive
    pid = -1
    while True:
        # idle: jump to the next arrival, which opens a busy period
        if nxt >= n:
            break
        t, w = arr[nxt]
        pid += 1
        cur, nxt = nxt, nxt + 1
        period.append(pid)
        remaining[cur] = w
        start[cur] = t
        order.append(cur)
        while cur is not None:
            a_next, w_next = arr[nxt]
            finish = t + remaining[cur]
            if a_next < finish:
                remaining[cur] -= a_next - t
                t = a_next
                new, nxt = nxt, nxt + 1
                period.append(pid)
                remaining[new] = w_next
                if discipline == "lifo-pr":
                    waiting.append(cur)
                    cur = new
                    start[cur] = t
                    order.append(cur)
                else:
                    waiting.append(new)
                continue
            t = finish
            dep[cur] = t
            remaining[cur] = 0.0
            if not waiting:
                cur = None
            else:
                if discipline == "fifo":
                    cur = waiting.popleft()
                elif discipline == "random":
                    j = int(rng.integers(len(waiting)))
                    waiting.rotate(-j)
                    cur = waiting.popleft()
                    waiting.rotate(j)
                else:
                    cur = waiting.pop()
                if cur not in start:
                    start[cur] = t
                    order.append(cur)
    size = len(period)
    a = np.array([arr[i][0] for i in range(size)])
    s = np.array([arr[i][1] for i in range(size)])
    d = np.array([dep[i] for i in range(size)])
    st = np.array([start[i] for i in range(size)])
    return QueueTrace(a, s, d, st, np.array(period), np.array(order), discipline, n)


def simulate_delay_model(g: ServiceDist, n: int, seed=None) -> BivariateSample:
    """Pairs ``(U_i, U_i + X_i)`` with uniform arrivals and iid delays from ``g``."""
    rng = as_generator(seed)
    u = rng.random(n)
    return BivariateSample(u, u + g.sample(n, rng))


def trace_to_permutation(trace: QueueTrace | BivariateSample, n: int | None = None,
                         ties: str = "strict", seed=None) -> Permutation:
    """Permutation relating arrival order and departure order of the first ``n`` customers."""
    if isinstance(trace, QueueTrace):
        n = trace.n if n is None else n
        if n > trace.size:
            raise PermutonError(f"trace holds only {trace.size} customers")
        data = BivariateSample(trace.arrivals[:n], trace.departures[:n])
    else:
        data = trace if n is None else BivariateSample(trace.x[:n], trace.y[:n])
    return ranks(data, ties=ties, seed=seed)[2]


def _periods_within(trace: QueueTrace, n: int) -> list[range]:
    return [r for r in trace.busy_periods if r.start < n]


def max_period_size(trace: QueueTrace, n: int | None = None) -> int:
    """Largest busy period among those containing one of the first ``n`` customers."""
    n = trace.n if n is None else n
    return max(len(r) for r in _periods_within(trace, n))


def verify_inversion_bound(trace: QueueTrace, n: int | None = None) -> tuple[Fraction, Fraction]:
    """``(t(21, Pi_n), 2 M_n / (n - 1))``; the first never exceeds the second."""
    n = trace.n if n is None else n
    if n < 2:
        raise PermutonError("n must be >= 2")
    tab = count_patterns_fast(trace_to_permutation(trace, n), 2)
    lhs = Fraction(tab.counts[1], tab.total)
    rhs = Fraction(2 * max_period_size(trace, n), n - 1)
    return lhs, rhs


def busy_period_blocks(trace: QueueTrace, n: int | None = None,
                       include_incomplete: bool = False) -> list[Permutation]:
    """Departure pattern of each busy period lying within the first ``n`` customers.

    A period that extends past customer ``n`` is incomplete at ``n`` and is
    dropped unless ``include_incomplete`` is set, in which case its pattern is
    taken over its customers up to ``n``.
    """
    n = trace.n if n is None else n
    blocks = []
    for r in _periods_within(trace, n):
        if r.stop > n and not include_incomplete:
            break
        stop = min(r.stop, n)
        blocks.append(Permutation(standardize(list(trace.departures[r.start:stop]))))
    return blocks


def completed_prefix(trace: QueueTrace, n: int | None = None) -> int:
    """Number of the first ``n`` customers whose busy period is complete by customer ``n``."""
    return sum(b.n for b in busy_period_blocks(trace, n))


def blocks_direct_sum(blocks: list[Permutation]) -> Permutation:
    vals: list[int] = []
    for b in blocks:
        shift = len(vals)
        vals.extend(v + shift for v in b.values)
    return Permutation(tuple(vals))


def is_sum_indecomposable(p: Permutation) -> bool:
    """True iff ``p`` is not ``a (+) b`` for non-empty ``a``, ``b``."""
    run_max = 0
    for i, v in enumerate(p.values[:-1], start=1):
        run_max = max(run_max, v)
        if run_max == i:
            return False
    return True
