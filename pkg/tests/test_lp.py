import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from pmoal.lp import linprog_max, max_slack_over_simplex, maximize_over_simplex


def scipy_max(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
    res = linprog(-np.asarray(c), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status, (-res.fun if res.status == 0 else None)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(0, 6), st.integers(0, 2))
def test_matches_scipy_on_random_lps(seed, n, k, e):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n)
    A_ub = rng.normal(size=(k, n)) if k else None
    b_ub = rng.normal(size=k) if k else None
    # keep the problem bounded: a simplex-like equality or a box row
    A_eq = np.vstack([np.ones(n), rng.normal(size=(e, n))])
    b_eq = np.concatenate([[1.0], rng.normal(scale=0.3, size=e)])
    status, value = scipy_max(c, A_ub, b_ub, A_eq, b_eq)
    res = linprog_max(c, A_ub, b_ub, A_eq, b_eq)
    if status == 2:
        assert res.status == "infeasible"
    else:
        assert status == 0
        assert res.status == "optimal"
        assert res.value == pytest.approx(value, abs=1e-7)
        assert np.all(res.x >= -1e-9)
        if A_ub is not None:
            assert np.all(A_ub @ res.x <= b_ub + 1e-7)
        assert np.allclose(A_eq @ res.x, b_eq, atol=1e-7)


def test_unbounded():
    res = linprog_max(np.array([1.0, 0.0]), np.array([[-1.0, 1.0]]), np.array([1.0]))
    assert res.status == "unbounded"


def test_infeasible():
    res = linprog_max(np.array([1.0]), np.array([[1.0]]), np.array([-1.0]))
    assert res.status == "infeasible"


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook largest-coefficient rule
    c = np.array([0.75, -150.0, 0.02, -6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    res = linprog_max(c, A, b)
    assert res.status == "optimal"
    assert res.value == pytest.approx(0.05)


def test_max_slack_simple():
    # p_A - p_B <= -s  on the 2-simplex: best s is 1 at p = (0, 1)
    s, p = max_slack_over_simplex(np.array([[1.0, -1.0]]))
    assert s == pytest.approx(1.0)
    assert p == pytest.approx([0.0, 1.0])


def test_max_slack_with_hard_rows_infeasible():
    s, p = max_slack_over_simplex(np.array([[1.0, -1.0]]), hard=np.eye(2))
    assert s == float("-inf") and p is None


def test_maximize_over_simplex():
    v, p = maximize_over_simplex(np.array([0.2, 0.9, 0.5]))
    assert v == pytest.approx(0.9)
    assert p == pytest.approx([0, 1, 0])
    v, p = maximize_over_simplex(np.array([1.0, 0.0]), equal=np.array([[1.0, -1.0]]))
    assert v == pytest.approx(0.5)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 5))
def test_max_slack_matches_scipy(seed, m, k):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(k, m))
    s, p = max_slack_over_simplex(A, cap=1.0)
    # same LP in scipy: vars p, s with s <= 1 free below
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, np.ones((k, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k), A_eq=np.hstack([np.ones((1, m)), [[0.0]]]), b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, 1.0)], method="highs")
    assert res.status == 0
    assert s == pytest.approx(-res.fun, abs=1e-7)
    assert np.all(A @ p + s <= 1e-7)
