from collections import Counter
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from scipy import stats

from permuton.chains import (composed_transition_H, cotransition_H, enumerate_F, enumerate_H,
                             h_transform_row, martin_kernel, one_step_row_H, simulate_copula_chain,
                             simulate_F, simulate_H, step_F, step_H, transition_H)
from permuton.copulas import copula_by_name, independence_copula, min_copula
from permuton.errors import PermutonError
from permuton.patterns import all_permutations, pattern_frequency
from permuton.perm import Permutation, identity, order_restrict

P = Permutation.parse


def test_steps():
    assert step_F(P("1"), 1) == P("21")
    assert step_F(P("21"), 3) == P("213")
    assert step_H(P("12"), 2, 3) == P("132")
    assert step_H(P("1"), 1, 2) == P("21")
    with pytest.raises(PermutonError):
        step_H(P("12"), 4, 1)
    with pytest.raises(PermutonError):
        step_F(P("12"), 0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exact_uniform_marginals(n):
    for law in (enumerate_F(n), enumerate_H(n)):
        assert len(law) == factorial(n)
        assert set(law.values()) == {Fraction(1, factorial(n))}


def test_transition_examples():
    assert transition_H(P("12"), P("123")) == Fraction(1, 3)
    assert transition_H(P("21"), P("123")) == 0
    for tau in all_permutations(4):
        assert transition_H(P("1"), tau) == Fraction(1, 24)
    assert one_step_row_H(P("12"))[P("123")] == Fraction(1, 3)


def test_composed_rows_match_pattern_formula():
    for sigma in all_permutations(2):
        row = composed_transition_H(sigma, 4)
        for tau in all_permutations(4):
            assert row.get(tau, 0) == Fraction(2, 24) * pattern_frequency(sigma, tau)


def test_cotransitions():
    assert cotransition_H(P("12"), P("132")) == Fraction(2, 3)
    assert cotransition_H(identity(3), identity(4)) == 1
    for n in range(1, 5):
        for tau in all_permutations(n + 1):
            assert sum(cotransition_H(s, tau) for s in all_permutations(n)) == 1


def test_martin_kernel():
    assert martin_kernel(P("12"), independence_copula()) == 1
    assert martin_kernel(P("21"), min_copula()) == 0
    assert martin_kernel(P("12"), P("132")) == Fraction(4, 3)
    with pytest.raises(PermutonError):
        martin_kernel(P("12"), copula_by_name("delay:exp:1"))
    v = martin_kernel(P("12"), copula_by_name("delay:exp:1"), m=20_000, seed=1)
    assert 1 < v < 2


def test_h_transform_rows():
    assert h_transform_row(P("12"), min_copula()) == {P("123"): 1}
    for sigma in list(all_permutations(2)) + list(all_permutations(3)):
        row = h_transform_row(sigma, independence_copula())
        assert sum(row.values()) == 1
        assert row == one_step_row_H(sigma)
    with pytest.raises(PermutonError):
        h_transform_row(P("21"), min_copula())


def test_trajectory_replay_and_projectivity():
    t = simulate_F(30, seed=4)
    assert [s.n for s in t.steps] == list(range(1, 31))
    for a, b in zip(t.steps, t.steps[1:]):
        assert order_restrict(b, a.n) == a
    h = simulate_H(20, seed=9)
    p = h.steps[0]
    for draw, nxt in zip(h.draws[1:], h.steps[1:]):
        p = step_H(p, *draw)
        assert p == nxt
    lines = h.to_jsonl().splitlines()
    assert len(lines) == 20 and '"n": 20' in lines[-1]


def test_min_copula_chain_is_identity():
    for seed in range(5):
        t = simulate_copula_chain(min_copula(), 40, seed=seed)
        assert all(s == identity(s.n) for s in t.steps)


def test_copula_chain_consistent_with_H_steps():
    t = simulate_copula_chain(independence_copula(), 25, seed=3)
    for prev, nxt, draw in zip(t.steps, t.steps[1:], t.draws[1:]):
        assert step_H(prev, draw[2], draw[3]) == nxt


def test_independence_chain_matches_H_marginals():
    runs = 20_000
    rng = np.random.default_rng(5)
    pts = rng.random((runs, 4, 2))
    from permuton.copulas import lehmer_index
    ox = np.argsort(pts[:, :, 0], axis=1)
    ys = np.take_along_axis(pts[:, :, 1], ox, axis=1)
    idx = lehmer_index(ys)
    counts = np.bincount(idx, minlength=24)
    assert stats.chisquare(counts).pvalue > 0.01
    # the library path on fewer runs, same law
    finals = Counter(simulate_copula_chain(independence_copula(), 4, seed=s).final for s in range(2400))
    assert stats.chisquare([finals[p] for p in all_permutations(4)]).pvalue > 0.01


def test_transition_frequency_12_to_123():
    hits = total = 0
    for s in range(6000):
        t = simulate_copula_chain(independence_copula(), 3, seed=s)
        if t.steps[1] == P("12"):
            total += 1
            hits += t.steps[2] == P("123")
    p = hits / total
    assert abs(p - 1 / 3) < 3 * np.sqrt(p * (1 - p) / total)


def test_cotransition_law_in_simulation():
    # P(Pi_2 = 12 | Pi_3 = 132) = 2/3, whatever the copula
    for c in (independence_copula(), copula_by_name("delay:exp:1")):
        hits = total = 0
        for s in range(9000):
            t = simulate_copula_chain(c, 3, seed=s)
            if t.steps[2] == P("132"):
                total += 1
                hits += t.steps[1] == P("12")
        p = hits / total
        assert abs(p - 2 / 3) < 3 * np.sqrt(2 / 9 / total)
