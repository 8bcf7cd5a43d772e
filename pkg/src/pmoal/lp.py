"""Dense two-phase simplex for the tiny LPs that arise over the outcome simplex.

Problems here have a handful of variables and at most a few dozen rows,
so a full tableau with Bland's rule is both fast enough and cycle-free.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    value: float


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> str:
    # last row holds reduced costs (maximisation: enter on positive entries)
    for _ in range(max_iter):
        r = T[-1, :ncols]
        candidates = np.flatnonzero(r > PIVOT_TOL)
        if candidates.size == 0:
            return "optimal"
        col = int(candidates[0])
        colv = T[:-1, col]
        rows = np.flatnonzero(colv > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, row, col)
    raise RuntimeError("simplex iteration limit reached")


def linprog_max(
    c: np.ndarray,
    A_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    max_iter: int = 5000,
) -> LPResult:
    """maximize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    m = m1 + m2

    # one slack/surplus per inequality; artificials for ">=" rows and equalities
    flip_ub = b_ub < 0
    flip_eq = b_eq < 0
    art_rows = [i for i in range(m1) if flip_ub[i]] + [m1 + k for k in range(m2)]
    n_art = len(art_rows)
    ncols = n + m1 + n_art
    T = np.zeros((m + 1, ncols + 1))
    basis = [0] * m
    for i in range(m1):
        sgn = -1.0 if flip_ub[i] else 1.0
        T[i, :n] = sgn * A_ub[i]
        T[i, n + i] = sgn
        T[i, -1] = sgn * b_ub[i]
        basis[i] = n + i
    for k in range(m2):
        sgn = -1.0 if flip_eq[k] else 1.0
        T[m1 + k, :n] = sgn * A_eq[k]
        T[m1 + k, -1] = sgn * b_eq[k]
    for a, i in enumerate(art_rows):
        T[i, n + m1 + a] = 1.0
        basis[i] = n + m1 + a

    if n_art:
        # phase 1: maximise -sum(artificials)
        T[-1, :] = T[art_rows].sum(axis=0)
        T[-1, n + m1:ncols] = 0.0
        _run(T, basis, ncols, max_iter)
        if T[-1, -1] > FEAS_TOL * max(1.0, np.abs(T[:-1, -1]).max(initial=0.0)):
            return LPResult("infeasible", None, float("nan"))
        keep = []
        for i in range(m):
            if basis[i] >= n + m1:
                nz = np.flatnonzero(np.abs(T[i, : n + m1]) > 1e-9)
                if nz.size == 0:
                    continue  # redundant row
                _pivot(T, basis, i, int(nz[0]))
            keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[n + m1:ncols], axis=1)
        ncols = n + m1

    cfull = np.zeros(ncols)
    cfull[:n] = c
    T[-1, :ncols] = cfull
    T[-1, -1] = 0.0
    for i, b in enumerate(basis):
        if cfull[b] != 0.0:
            T[-1] -= cfull[b] * T[i]
    status = _run(T, basis, ncols, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, float("inf"))
    x = np.zeros(ncols)
    for i, b in enumerate(basis):
        x[b] = T[i, -1]
    x = x[:n]
    return LPResult("optimal", x, float(c @ x))


def max_slack_over_simplex(
    strict: np.ndarray,
    hard: np.ndarray | None = None,
    equal: np.ndarray | None = None,
    interior: bool = False,
    cap: float = 1.0,
) -> tuple[float, np.ndarray | None]:
    """Largest s such that some p in the simplex has ``strict @ p + s <= 0``.

    ``hard`` rows must hold exactly (``hard @ p <= 0``), ``equal`` rows as
    ``equal @ p == 0``. With ``interior`` the slack also bounds every
    coordinate of p from below. Returns ``(-inf, None)`` when even the hard
    system is infeasible; s is capped at ``cap``.
    """
    strict = np.atleast_2d(np.asarray(strict, dtype=float))
    m = strict.shape[1]
    hard = np.zeros((0, m)) if hard is None else np.atleast_2d(np.asarray(hard, dtype=float)).reshape(-1, m)
    equal = np.zeros((0, m)) if equal is None else np.atleast_2d(np.asarray(equal, dtype=float)).reshape(-1, m)
    if interior:
        strict = np.vstack([strict, -np.eye(m)])
    k = strict.shape[0]
    # variables: p (m), s_plus, s_minus ; s = s_plus - s_minus, s_plus <= cap
    c = np.zeros(m + 2)
    c[m], c[m + 1] = 1.0, -1.0
    A_ub = np.zeros((k + hard.shape[0] + 1, m + 2))
    A_ub[:k, :m] = strict
    A_ub[:k, m] = 1.0
    A_ub[:k, m + 1] = -1.0
    A_ub[k : k + hard.shape[0], :m] = hard
    A_ub[-1, m] = 1.0
    b_ub = np.zeros(A_ub.shape[0])
    b_ub[-1] = cap
    A_eq = np.zeros((1 + equal.shape[0], m + 2))
    A_eq[0, :m] = 1.0
    A_eq[1:, :m] = equal
    b_eq = np.zeros(A_eq.shape[0])
    b_eq[0] = 1.0
    res = linprog_max(c, A_ub, b_ub, A_eq, b_eq)
    if res.status == "infeasible":
        return float("-inf"), None
    if res.status == "unbounded":  # cannot happen with the cap, kept for safety
        raise RuntimeError("slack LP unbounded")
    p = np.clip(res.x[:m], 0.0, None)
    return res.value, p / p.sum()


def maximize_over_simplex(
    objective: np.ndarray, hard: np.ndarray | None = None, equal: np.ndarray | None = None
) -> tuple[float, np.ndarray | None]:
    """max objective @ p over {p in simplex, hard @ p <= 0, equal @ p == 0}; (-inf, None) if empty."""
    objective = np.asarray(objective, dtype=float)
    m = objective.size
    hard = None if hard is None else np.atleast_2d(np.asarray(hard, dtype=float)).reshape(-1, m)
    A_eq = np.ones((1, m))
    b_eq = np.ones(1)
    if equal is not None:
        equal = np.atleast_2d(np.asarray(equal, dtype=float)).reshape(-1, m)
        A_eq = np.vstack([A_eq, equal])
        b_eq = np.concatenate([b_eq, np.zeros(equal.shape[0])])
    b_ub = None if hard is None else np.zeros(hard.shape[0])
    res = linprog_max(objective, hard, b_ub, A_eq, b_eq)
    if res.status != "optimal":
        return float("-inf"), None
    return res.value, res.x
