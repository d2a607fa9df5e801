from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from permuton.copulas import (CountermonotoneCopula, DelayCopula, copula_by_name,
                              from_conditional_quantile, independence_copula, min_copula,
                              pattern_law_exact, pattern_law_mc, sample_patterns)
from permuton.errors import PermutonError
from permuton.queues import ServiceDist

KS_1PCT = 1.63 / np.sqrt(100_000)


def test_closed_forms():
    ind = independence_copula()
    assert ind.cdf(0.5, 0.5) == 0.25
    assert np.all(min_copula().conditional_quantile(0.3, np.linspace(0, 1, 5)) == 0.3)
    assert np.allclose(ind.conditional_quantile(0.3, np.linspace(0, 1, 5)), np.linspace(0, 1, 5))
    for c in (ind, min_copula(), CountermonotoneCopula()):
        u = np.linspace(0, 1, 11)
        assert np.allclose(c.cdf(u, 1.0), u) and np.allclose(c.cdf(1.0, u), u)


def test_capabilities():
    assert independence_copula().has("cdf")
    d = copula_by_name("delay:exp:1")
    assert isinstance(d, DelayCopula)
    assert not d.has("cdf") and not d.has("conditional_quantile")
    with pytest.raises(NotImplementedError):
        d.cdf(0.5, 0.5)
    with pytest.raises(PermutonError):
        copula_by_name("gumbel")


@pytest.mark.parametrize("name", ["independence", "min", "countermonotone", "delay:exp:1", "delay:det:0.3"])
def test_marginals_uniform(name):
    pts = copula_by_name(name).sample(100_000, seed=7)
    for col in pts.T:
        assert stats.kstest(col, "uniform").statistic < KS_1PCT


def test_conditional_quantile_constructions():
    anti = from_conditional_quantile(lambda x, y: 1 - x, "anti")
    pts = anti.sample(100_000, seed=1)
    assert np.allclose(pts[:, 1], 1 - pts[:, 0])
    assert stats.kstest(pts[:, 1], "uniform").statistic < KS_1PCT
    comon = from_conditional_quantile(lambda x, y: x)
    assert pattern_law_mc(comon, 3, 2000, seed=0).probs[0] == 1.0
    scalar_only = from_conditional_quantile(lambda x, y: float(y))
    assert scalar_only.sample(10, seed=0).shape == (10, 2)
    with pytest.raises(PermutonError):
        from_conditional_quantile(lambda x, y: x + 2).sample(5, seed=0)


def test_independent_w_reproduces_independence():
    c = from_conditional_quantile(lambda x, y: y)
    law = pattern_law_mc(c, 3, 60_000, seed=3)
    counts = np.round(np.array(law.probs) * law.m)
    assert stats.chisquare(counts).pvalue > 0.01


def test_exact_laws():
    assert pattern_law_exact(independence_copula(), 3).probs == (Fraction(1, 6),) * 6
    assert pattern_law_exact(min_copula(), 4).probs[0] == 1
    for c in (independence_copula(), min_copula(), CountermonotoneCopula()):
        assert pattern_law_exact(c, 1).probs == (1,)
    assert pattern_law_exact(CountermonotoneCopula(), 3).probs[-1] == 1
    with pytest.raises(PermutonError):
        pattern_law_exact(copula_by_name("delay:exp:1"), 2)


def test_mc_law_independence():
    law = pattern_law_mc(independence_copula(), 3, 200_000, seed=11)
    assert abs(sum(law.probs) - 1) < 1e-12
    for p, se in zip(law.probs, law.se):
        assert abs(p - 1 / 6) < 3 * se


def test_mc_min_copula_ties_resolve_to_identity():
    law = pattern_law_mc(min_copula(), 3, 5000, seed=0)
    assert law.probs[0] == 1.0


def test_k2_each_draw_one_pattern():
    idx = sample_patterns(copula_by_name("delay:exp:1"), 2, 1000, seed=2)
    assert set(idx) <= {0, 1}


def test_json_shape():
    js = pattern_law_mc(independence_copula(), 2, 100, seed=0).to_json()
    assert set(js) == {"k", "mode", "m", "probs", "se"}
    assert set(js["probs"]) == {"12", "21"}
    assert pattern_law_exact(independence_copula(), 2).to_json()["probs"]["12"] == "1/2"


def test_delay_departure_cdf_is_a_cdf():
    c = DelayCopula(ServiceDist.parse("pareto:2.5,0.4"))
    t = np.linspace(-1, 30, 400)
    f = c.departure_cdf(t)
    assert np.all(np.diff(f) >= -1e-12) and f[0] == 0 and f[-1] > 0.99
