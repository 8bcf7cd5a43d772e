import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from pmoal.metrics import betainc, confusion_matrix, per_class_f1, t_cdf, weighted_f1, welch_one_sided, win_counts


def test_hand_f1():
    pred, truth = [0, 0, 1], [0, 1, 1]
    assert per_class_f1(pred, truth, 2) == pytest.approx([2 / 3, 2 / 3])
    assert weighted_f1(pred, truth, 2) == pytest.approx(2 / 3)


def test_perfect_f1():
    y = [0, 1, 0, 1, 2, 2]
    assert weighted_f1(y, y, 3) == 1.0


def test_confusion_layout():
    cm = confusion_matrix([1, 1, 0], [0, 1, 1], 2)
    assert cm.tolist() == [[0, 1], [1, 1]]


def test_empty_class_f1_zero():
    assert per_class_f1([0, 0], [0, 0], 2).tolist() == [1.0, 0.0]


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 60), st.floats(0.05, 60), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(-30, 30), st.floats(0.5, 200))
def test_t_cdf_matches_scipy(t, df):
    assert t_cdf(t, df) == pytest.approx(stats.t.cdf(t, df), abs=1e-10)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=12), st.lists(st.floats(-100, 100), min_size=2, max_size=12))
def test_welch_matches_scipy(a, b):
    if np.var(a) == 0 and np.var(b) == 0:
        return
    t, df, p = welch_one_sided(a, b)
    ref = stats.ttest_ind(a, b, equal_var=False, alternative="less")
    assert t == pytest.approx(ref.statistic, rel=1e-9, abs=1e-9)
    assert p == pytest.approx(ref.pvalue, abs=1e-9)


def test_welch_identical_samples():
    assert welch_one_sided([3, 3, 3], [3, 3, 3])[2] == 0.5
    assert welch_one_sided([1, 2, 3], [1, 2, 3])[2] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        welch_one_sided([1], [1, 2])


def test_welch_p_uniform_under_null():
    rng = np.random.default_rng(0)
    ps = np.sort([welch_one_sided(rng.normal(size=10), rng.normal(size=10))[2] for _ in range(1000)])
    ecdf = np.arange(1, 1001) / 1000
    assert np.max(np.abs(ecdf - ps)) < 0.1


def test_win_counts_ties():
    wins = win_counts({"a": {0: 1.0, 1: 2.0}, "b": {0: 1.0, 1: 3.0}})
    assert wins == {"a": 2, "b": 1}


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 10_000))
def test_win_count_bounds(n_seeds, n_agents, seed):
    rng = np.random.default_rng(seed)
    table = {f"x{k}": {s: float(rng.integers(0, 3)) for s in range(n_seeds)} for k in range(n_agents)}
    wins = win_counts(table)
    assert sum(wins.values()) >= n_seeds
    assert all(w <= n_seeds for w in wins.values())


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=40), st.integers(0, 10_000))
def test_weighted_f1_bounds(truth, seed):
    pred = np.random.default_rng(seed).integers(0, 3, size=len(truth))
    assert 0.0 <= weighted_f1(pred, truth, 3) <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10_000))
def test_weighted_equals_macro_on_balanced(k, seed):
    truth = np.repeat([0, 1, 2], k)
    pred = np.random.default_rng(seed).integers(0, 3, size=truth.size)
    assert weighted_f1(pred, truth, 3) == pytest.approx(per_class_f1(pred, truth, 3).mean())
