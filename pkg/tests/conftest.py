import numpy as np
import pytest
from hypothesis import strategies as st

from permuton.perm import BivariateSample, Permutation


@st.composite
def permutations(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


@st.composite
def samples(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    xs = draw(st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n, unique=True))
    ys = draw(st.lists(st.integers(-10**6, 10**6), min_size=n, max_size=n, unique=True))
    return BivariateSample(np.array(xs, float), np.array(ys, float))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_perm(rng, n):
    return Permutation(tuple(int(v) for v in rng.permutation(n) + 1))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
