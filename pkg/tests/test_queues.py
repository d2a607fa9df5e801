from collections import Counter

import numpy as np
import pytest
from scipy import stats

from permuton.errors import PermutonError
from permuton.patterns import count_patterns_fast
from permuton.perm import Permutation, identity
from permuton.queues import (QueueTrace, ServiceDist, blocks_direct_sum, busy_period_blocks,
                             completed_prefix, is_sum_indecomposable, max_period_size,
                             simulate_delay_model, simulate_mg1, trace_to_permutation,
                             verify_inversion_bound)

EXP1 = ServiceDist.parse("exp:1")


def _trace(arrivals, services, departures, discipline="lifo-pr"):
    a = np.asarray(arrivals, float)
    d = np.asarray(departures, float)
    period = np.zeros(len(a), dtype=int)
    busy_until = -np.inf
    pid = -1
    for i in range(len(a)):
        if a[i] >= busy_until:
            pid += 1
        period[i] = pid
        busy_until = max(busy_until, d[i])
    return QueueTrace(a, np.asarray(services, float), d, a.copy(), period,
                      np.arange(len(a)), discipline, len(a))


def test_service_parsing():
    assert ServiceDist.parse("det:0.5").mean == 0.5
    assert ServiceDist.parse("exponential:2").mean == 0.5
    assert not ServiceDist.parse("pareto:2.5").finite_third_moment
    assert ServiceDist.parse("pareto:4,0.5").finite_third_moment
    with pytest.raises(PermutonError):
        ServiceDist.parse("weibull:1")
    with pytest.raises(PermutonError):
        ServiceDist.parse("exp:x")


@pytest.mark.parametrize("disc", ["fifo", "lifo", "lifo-pr", "random"])
def test_dynamics_and_bound_all_disciplines(disc):
    for seed in range(5):
        tr = simulate_mg1(0.5, EXP1, 2000, seed=seed, discipline=disc)
        assert tr.check_dynamics()
        lhs, rhs = verify_inversion_bound(tr)
        assert lhs <= rhs


def test_fifo_gives_identity():
    tr = simulate_mg1(0.7, EXP1, 3000, seed=2, discipline="fifo")
    assert trace_to_permutation(tr) == identity(3000)
    a, s, d = tr.arrivals, tr.services, tr.departures
    prev = -np.inf
    for i in range(tr.size):
        prev = max(a[i], prev) + s[i]
        assert np.isclose(d[i], prev)


def test_deterministic_widely_spaced_arrivals():
    tr = simulate_mg1(0.01, ServiceDist.parse("det:0.001"), 500, seed=0)
    assert all(len(r) == 1 for r in tr.busy_periods)
    assert all(b == Permutation((1,)) for b in busy_period_blocks(tr))


def test_mean_busy_period_size():
    tr = simulate_mg1(0.5, EXP1, 25_000, seed=8)
    k = tr.K
    assert len(k) >= 10_000
    assert abs(k.mean() - 2.0) < 0.1


def test_inversions_inside_busy_periods():
    tr = simulate_mg1(0.6, EXP1, 600, seed=3, discipline="lifo-pr")
    p = trace_to_permutation(tr, 600)
    period = tr.period
    for i in range(600):
        for j in range(i + 1, 600):
            if p(i + 1) > p(j + 1):
                assert period[i] == period[j]


def test_vacuous_bound_single_period():
    tr = _trace([0, 1, 2], [5, 1, 1], [7, 3, 2.5])
    lhs, rhs = verify_inversion_bound(tr)
    assert max_period_size(tr) == 3 and rhs >= 1 >= lhs


def test_constructed_overtaking_block():
    tr = _trace([0.0, 0.5], [2.0, 0.5], [2.5, 1.0])
    assert busy_period_blocks(tr) == [Permutation((2, 1))]


def test_blocks_reconstruct_completed_prefix():
    for seed in range(30):
        tr = simulate_mg1(0.5, EXP1, 300, seed=seed, discipline="lifo-pr")
        blocks = busy_period_blocks(tr, 250)
        m = completed_prefix(tr, 250)
        if m:
            assert blocks_direct_sum(blocks) == trace_to_permutation(tr, m)
        assert all(is_sum_indecomposable(b) for b in blocks)


def test_nonpreemptive_lifo_blocks_can_decompose():
    found = False
    for seed in range(20):
        tr = simulate_mg1(0.8, EXP1, 500, seed=seed, discipline="lifo")
        if not all(is_sum_indecomposable(b) for b in busy_period_blocks(tr)):
            found = True
            break
    assert found


def test_indecomposable():
    assert is_sum_indecomposable(Permutation((2, 1)))
    assert not is_sum_indecomposable(Permutation((1, 3, 2)))
    assert is_sum_indecomposable(Permutation((1,)))


def test_consecutive_period_sizes_independent():
    tr = simulate_mg1(0.5, EXP1, 30_000, seed=12, discipline="lifo-pr")
    k = np.minimum(tr.K, 4)
    a, b = k[:-1:2], k[1::2]
    table = np.zeros((4, 4))
    for x, y in zip(a, b):
        table[x - 1, y - 1] += 1
    assert stats.chi2_contingency(table).pvalue > 0.01


def test_unstable_rejected():
    with pytest.raises(PermutonError):
        simulate_mg1(1.2, EXP1, 10)
    with pytest.raises(PermutonError):
        simulate_mg1(0.5, EXP1, 10, discipline="sjf")


def test_delay_model():
    data = simulate_delay_model(ServiceDist.parse("det:0.3"), 500, seed=1)
    assert trace_to_permutation(data) == identity(500)
    data = simulate_delay_model(EXP1, 10_000, seed=1)
    tab = count_patterns_fast(trace_to_permutation(data), 2)
    t21 = tab.counts[1] / tab.total
    assert 0 < t21 < 0.5
    again = simulate_delay_model(EXP1, 10_000, seed=1)
    assert np.array_equal(again.y, data.y)
    assert stats.kstest(data.x, "uniform").pvalue > 0.01


def test_trace_csv():
    tr = simulate_mg1(0.5, EXP1, 20, seed=0)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "arrival,departure,busy_period_id" and len(lines) == tr.size + 1


def test_reproducible():
    a = simulate_mg1(0.5, EXP1, 400, seed=5, discipline="random")
    b = simulate_mg1(0.5, EXP1, 400, seed=5, discipline="random")
    assert np.array_equal(a.departures, b.departures)
