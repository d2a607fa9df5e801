"""Rank-pattern tests of independence.

Under independence every pattern of length ``k`` has limit frequency ``1/k!``.
The frequencies are U-statistics, so ``sqrt(n) (f - 1/k!)`` is asymptotically
normal with covariance ``k^2 cov(phi_sigma, phi_tau)``, where
``phi_sigma(x, y)`` is the probability that ``k`` points form ``sigma`` given
that one of them sits at ``(x, y)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, sqrt

import numpy as np
import sympy as sp
from scipy import stats

from .copulas import IndependenceCopula
from .errors import PermutonError
from .patterns import all_permutations, count_patterns_fast, counts3_batch, counts4_array, perm_index
from .perm import BivariateSample, Permutation, ranks
from .rng import as_generator

X, Y = sp.symbols("x y")

# displayed closed forms for length 3, keyed by one-line word
_PHI3_TEXT = {
    "123": "2*x*(1-x)*y*(1-y) + x**2*y**2/2 + (1-x)**2*(1-y)**2/2",
    "132": "x**2*y*(1-y) + x*(1-x)*y**2 + (1-x)**2*(1-y)**2/2",
    "213": "x*(1-x)*(1-y)**2 + (1-x)**2*y*(1-y) + x**2*y**2/2",
    "231": "x*(1-x)*y**2 + (1-x)**2*y*(1-y) + x**2*(1-y)**2/2",
    "312": "x*(1-x)*(1-y)**2 + x**2*y*(1-y) + (1-x)**2*y**2/2",
    "321": "2*x*(1-x)*y*(1-y) + x**2*(1-y)**2/2 + (1-x)**2*y**2/2",
}


def _as3(sigma) -> Permutation:
    sigma = sigma if isinstance(sigma, Permutation) else Permutation.parse(str(sigma))
    if sigma.n != 3:
        raise PermutonError("phi is tabulated for patterns of length 3")
    return sigma


@lru_cache(maxsize=None)
def _phi3(word: str) -> sp.Poly:
    return sp.Poly(sp.sympify(_PHI3_TEXT[word], locals={"x": X, "y": Y}), X, Y, domain="QQ")


def phi_poly(sigma) -> sp.Poly:
    """``phi_sigma`` for ``sigma`` in ``S_3`` as an exact polynomial in ``x, y``."""
    return _phi3(_as3(sigma).word())


@lru_cache(maxsize=None)
def phi_poly_general(sigma: Permutation) -> sp.Poly:
    """``phi_sigma`` for any length ``k`` from the rank distribution of the fixed point.

    The fixed point has x-rank ``r`` with probability
    ``binom(k-1, r-1) x^(r-1) (1-x)^(k-r)``, the same for y independently,
    and the other ``k - 1`` points are in uniformly random relative order.
    """
    k = sigma.n

    def bern(t, r):
        return sp.binomial(k - 1, r - 1) * t ** (r - 1) * (1 - t) ** (k - r)

    expr = sum(bern(X, r) * bern(Y, sigma(r)) for r in range(1, k + 1)) / sp.factorial(k - 1)
    return sp.Poly(sp.expand(expr), X, Y, domain="QQ")


def phi(sigma, x, y) -> float:
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise PermutonError("phi is defined on the unit square")
    val = phi_poly(sigma).eval({X: sp.Rational(x) if isinstance(x, Fraction) else x,
                                Y: sp.Rational(y) if isinstance(y, Fraction) else y})
    return Fraction(str(val)) if isinstance(val, sp.Rational) else float(val)


def integrate_unit_square(poly: sp.Poly) -> Fraction:
    """Exact integral over ``[0, 1]^2`` by monomial integration."""
    total = Fraction(0)
    for (i, j), c in poly.terms():
        total += Fraction(int(c.numerator), int(c.denominator)) / ((i + 1) * (j + 1))
    return total


def _zeta(p: sp.Poly, q: sp.Poly, k: int) -> Fraction:
    return k * k * (integrate_unit_square(p * q) - integrate_unit_square(p) * integrate_unit_square(q))


def zeta(sigma, tau) -> Fraction:
    """``9 cov(h_sigma(Z1, Z2, Z3), h_tau(Z1, Z2', Z3'))`` under independence."""
    return _zeta(phi_poly(sigma), phi_poly(tau), 3)


@lru_cache(maxsize=None)
def cov_matrix(k: int = 3) -> tuple[tuple[Fraction, ...], ...]:
    """Exact asymptotic covariance of ``sqrt(n) (t(sigma, Pi_n))_sigma`` under independence.

    ``k = 3`` uses the tabulated ``phi``; other ``k`` use ``phi_poly_general``.
    Rows follow the lexicographic order of ``S_k``.
    """
    perms = all_permutations(k)
    polys = [phi_poly(s) if k == 3 else phi_poly_general(s) for s in perms]
    return tuple(tuple(_zeta(p, q, k) for q in polys) for p in polys)


def cov_matrix_float(k: int = 3) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in cov_matrix(k)])


# --- reports ------------------------------------------------------------

@dataclass
class TestReport:
    test: str
    n: int
    statistic: float
    p_value: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"test": self.test, "n": self.n, "statistic": float(self.statistic),
                "p_value": float(self.p_value), "details": self.details}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _perm(data) -> Permutation:
    if isinstance(data, Permutation):
        return data
    if isinstance(data, BivariateSample):
        return ranks(data)[2]
    raise PermutonError("expected a BivariateSample or a Permutation")


def kendall_test(data) -> TestReport:
    """Two-sided test based on Kendall's tau = t(12) - t(21).

    Uses the classical null variance ``2(2n + 5) / (9 n (n - 1))``.
    """
    p = _perm(data)
    n = p.n
    if n < 2:
        raise PermutonError("Kendall's tau needs n >= 2")
    tab = count_patterns_fast(p, 2)
    conc, disc = tab.counts
    tau = (conc - disc) / tab.total
    var = 2 * (2 * n + 5) / (9 * n * (n - 1))
    z = tau / sqrt(var)
    pval = float(2 * stats.norm.sf(abs(z)))
    return TestReport("kendall", n, z, pval, {
        "tau": tau, "concordant": conc, "discordant": disc, "pairs": tab.total,
        # the same difference divided once more by binom(n, 2), as in the published display
        "tau_published_form": tau / tab.total,
    })


def pattern3_test(data=None, sigma="312", t_obs: float | None = None, n: int | None = None) -> TestReport:
    """One-sided (upper) z-test of ``t(sigma, Pi_n) = 1/6``.

    ``t_obs`` overrides the frequency computed from ``data``; ``n`` must then
    be given explicitly or through ``data``.
    """
    sigma = _as3(sigma)
    if data is not None:
        p = _perm(data)
        n = p.n if n is None else n
        if t_obs is None:
            t_obs = float(count_patterns_fast(p, 3).frequency(sigma))
    if n is None or t_obs is None:
        raise PermutonError("need data or both t_obs and n")
    if n < 3:
        raise PermutonError("pattern test needs n >= 3")
    z2 = zeta(sigma, sigma)
    stat = sqrt(n) * (t_obs - 1 / 6) / sqrt(float(z2))
    return TestReport("pattern3", n, stat, float(stats.norm.sf(stat)), {
        "sigma": sigma.word(), "t_obs": t_obs, "zeta": str(z2), "alternative": "greater",
    })


def _quadratic_form(dev: np.ndarray, cov: np.ndarray, rank: int | None = None) -> tuple[float, int]:
    w, v = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if rank is None:
        rank = int(np.sum(w > w[0] * 1e-9))
    proj = v[:, :rank].T @ dev
    return float(np.sum(proj ** 2 / w[:rank])), rank


def pattern3_joint_test(data) -> TestReport:
    """Quadratic-form test on all six length-3 frequencies with the exact covariance.

    The covariance is singular; the pseudo-inverse is used and the degrees of
    freedom equal its rank.
    """
    p = _perm(data)
    n = p.n
    if n < 3:
        raise PermutonError("pattern test needs n >= 3")
    f = count_patterns_fast(p, 3).frequencies()
    return _joint3(f, n)


def _joint3(f: np.ndarray, n: int) -> TestReport:
    dev = np.sqrt(n) * (f - 1 / 6)
    stat, df = _quadratic_form(dev, cov_matrix_float(3))
    return TestReport("pattern3-joint", n, stat, float(stats.chi2.sf(stat, df)), {
        "df": df, "frequencies": {s.word(): float(x) for s, x in zip(all_permutations(3), f)},
    })


PATTERN4_RANK = 9  # (k - 1)^2 non-degenerate directions for k = 4
PATTERN4_MIN_M = 100


def independent_permutations(n: int, m: int, seed=None) -> np.ndarray:
    """``(m, n)`` array of order-relating permutations of independent samples."""
    rng = as_generator(seed)
    pts = IndependenceCopula().sample(m * n, rng).reshape(m, n, 2)
    ox = np.argsort(pts[:, :, 0], axis=1)
    ys = np.take_along_axis(pts[:, :, 1], ox, axis=1)
    out = np.empty((m, n), dtype=np.int64)
    np.put_along_axis(out, np.argsort(ys, axis=1), np.arange(1, n + 1)[None, :].repeat(m, 0), axis=1)
    return out


def pattern4_null_cov(n: int, m: int, seed=None) -> np.ndarray:
    """Monte Carlo covariance of ``sqrt(n) f`` over ``S_4`` for independent samples of size ``n``."""
    if m < PATTERN4_MIN_M:
        raise PermutonError(f"need at least {PATTERN4_MIN_M} null samples, got {m}")
    perms = independent_permutations(n, m, seed)
    f = np.array([counts4_array(row) for row in perms]) / comb(n, 4)
    return np.cov(np.sqrt(n) * f, rowvar=False)


def pattern4_test_mc(data, m: int = 1000, seed=None, null_cov: np.ndarray | None = None) -> TestReport:
    """Quadratic-form test on the 24 length-4 frequencies.

    The null covariance is estimated from ``m`` simulated independent samples
    of the same size (or passed in as ``null_cov``). Only the leading
    ``(k-1)^2 = 9`` eigen-directions carry first-order fluctuations; the
    statistic is referred to chi-square with that many degrees of freedom.
    Length-4 frequencies determine the independence copula, so the test is
    consistent against every alternative.
    """
    p = _perm(data)
    n = p.n
    if n < 4:
        raise PermutonError("length-4 test needs n >= 4")
    cov = pattern4_null_cov(n, m, seed) if null_cov is None else null_cov
    f = counts4_array(p.values) / comb(n, 4)
    dev = np.sqrt(n) * (f - 1 / 24)
    stat, df = _quadratic_form(dev, cov, PATTERN4_RANK)
    return TestReport("pattern4", n, stat, float(stats.chi2.sf(stat, df)), {
        "df": df, "m": None if null_cov is not None else m,
    })


def pattern3_frequencies_batch(perms: np.ndarray) -> np.ndarray:
    n = perms.shape[1]
    return counts3_batch(perms) / comb(n, 3)


def pattern3_index(sigma) -> int:
    return perm_index(_as3(sigma))


def null_sigma_expectation() -> Fraction:
    """``E h_sigma = 1/3!`` for every ``sigma`` (as an exact integral of ``phi``)."""
    return integrate_unit_square(phi_poly("123"))


__all__ = [
    "phi", "phi_poly", "phi_poly_general", "zeta", "cov_matrix", "cov_matrix_float",
    "TestReport", "kendall_test", "pattern3_test", "pattern3_joint_test", "pattern4_test_mc",
    "pattern4_null_cov", "independent_permutations", "integrate_unit_square",
]
