import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from exsearch.analytics import cohens_kappa, kappa_from_table, welch_t_test


def random_cases(n=50, seed=99):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        na, nb = rng.integers(2, 60, size=2)
        a = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 5), size=na)
        b = rng.normal(rng.uniform(-2, 2), rng.uniform(0.1, 5), size=nb)
        yield a.tolist(), b.tolist()


def test_welch_matches_reference():
    for a, b in random_cases():
        ours = welch_t_test(a, b)
        ref = sps.ttest_ind(a, b, equal_var=False)
        assert abs(ours.p_value - ref.pvalue) <= 1e-6
        assert ours.t == pytest.approx(ref.statistic, rel=1e-9)


def test_identical_samples():
    r = welch_t_test([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    assert r.t == 0 and r.p_value == 1.0


def test_degenerate_zero_variance():
    assert welch_t_test([1, 1, 1], [2, 2, 2]).p_value == 0.0
    assert welch_t_test([2, 2, 2], [2, 2]).p_value == 1.0


def test_too_small_sample():
    with pytest.raises(ValueError):
        welch_t_test([1], [1, 2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=15),
       st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=15))
def test_welch_symmetry_and_range(a, b):
    ab, ba = welch_t_test(a, b), welch_t_test(b, a)
    assert 0.0 <= ab.p_value <= 1.0
    assert ab.p_value == pytest.approx(ba.p_value, abs=1e-12)
    assert ab.t == -ba.t or (math.isnan(ab.t) and math.isnan(ba.t))


def test_kappa_identical():
    assert cohens_kappa(list("aabbc"), list("aabbc")).kappa == 1.0


def test_kappa_tables():
    k = kappa_from_table(4, 1, 1, 4)
    assert (k.observed, k.expected) == pytest.approx((0.8, 0.5))
    assert k.kappa == pytest.approx(0.6, abs=1e-12)
    assert kappa_from_table(0, 5, 5, 0).kappa == pytest.approx(-1.0, abs=1e-12)


def test_kappa_errors():
    with pytest.raises(ValueError):
        cohens_kappa(["a"], ["a", "b"])
    with pytest.raises(ValueError):
        cohens_kappa([], [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("xyz"), st.sampled_from("xyz")), min_size=1, max_size=30))
def test_kappa_bounds_and_symmetry(pairs):
    a, b = [p[0] for p in pairs], [p[1] for p in pairs]
    k = cohens_kappa(a, b)
    assert -1.0 - 1e-12 <= k.kappa <= 1.0 + 1e-12
    assert k.kappa == pytest.approx(cohens_kappa(b, a).kappa)
