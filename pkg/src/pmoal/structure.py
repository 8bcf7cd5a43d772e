"""Cell decomposition and observability structure of a partial monitoring game."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .game import Game
from .lp import max_slack_over_simplex, maximize_over_simplex

LP_TOL = 1e-7
RANK_TOL = 1e-7
RESIDUAL_TOL = 1e-9
_ZERO_ROW = 1e-12

PARETO = "pareto"
DOMINATED = "dominated"
DEGENERATE = "degenerate"

Pair = tuple[int, int]


class StructureError(RuntimeError):
    """The game cannot be played by a confidence-bound strategy (unobservable)."""


def _nonzero_rows(rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    return rows[np.abs(rows).max(axis=1) > _ZERO_ROW] if rows.size else rows


def cell_constraints(game: Game, i: int) -> np.ndarray:
    """Rows (c_i - c_k) for k != i; the cell of i is {p : rows @ p <= 0}."""
    C = game.cost
    rows = np.array([C[i] - C[k] for k in range(game.n_actions) if k != i])
    return _nonzero_rows(rows)


def cell_feasible(
    game: Game, constraints: list[tuple[np.ndarray, bool]], tol: float = LP_TOL
) -> tuple[bool, np.ndarray | None, float]:
    """Feasibility of ``v @ p <= 0`` (non-strict) / ``v @ p < 0`` (strict) over the simplex.

    Strict rows are handled by maximising a common slack s; the system is
    feasible when s* > tol. A purely non-strict system puts the slack on
    every row and accepts s* >= -tol.
    """
    m = game.n_outcomes
    if not constraints:
        return True, np.full(m, 1.0 / m), float("inf")
    strict = [np.asarray(v, dtype=float) for v, is_strict in constraints if is_strict]
    hard = [np.asarray(v, dtype=float) for v, is_strict in constraints if not is_strict]
    if strict:
        if any(np.abs(v).max() <= _ZERO_ROW for v in strict):
            return False, None, float("-inf")
        hard_rows = _nonzero_rows(np.array(hard)) if hard else None
        s, p = max_slack_over_simplex(np.array(strict), hard_rows)
        return bool(s > tol), p, s
    rows = _nonzero_rows(np.array(hard))
    if rows.size == 0:
        return True, np.full(m, 1.0 / m), float("inf")
    s, p = max_slack_over_simplex(rows)
    return bool(s >= -tol), p, s


def affine_dimension(
    m: int, hard: np.ndarray, equal: np.ndarray | None = None, tol: float = LP_TOL
) -> int:
    """Dimension of {p in simplex : hard @ p <= 0, equal @ p == 0}; -1 if empty.

    Every inequality (including p >= 0) that cannot be made slack anywhere
    on the set is an implicit equality; the dimension is M minus the rank
    of all equalities.
    """
    hard = _nonzero_rows(np.asarray(hard, dtype=float).reshape(-1, m))
    equal = np.zeros((0, m)) if equal is None else _nonzero_rows(np.asarray(equal, dtype=float).reshape(-1, m))
    value, _ = maximize_over_simplex(np.zeros(m), hard if hard.size else None, equal if equal.size else None)
    if not np.isfinite(value):
        return -1
    eqs = [np.ones(m), *equal]
    for r in [*hard, *(-np.eye(m))]:
        slack, _ = maximize_over_simplex(-r, hard if hard.size else None, equal if equal.size else None)
        if slack <= tol:
            eqs.append(r)
    E = np.array(eqs)
    E = E / np.linalg.norm(E, axis=1, keepdims=True)
    sv = np.linalg.svd(E, compute_uv=False)
    return m - int(np.sum(sv > RANK_TOL))


def classify_actions(game: Game, tol: float = LP_TOL) -> list[str]:
    """Pareto (full-dimensional cell), dominated (empty cell) or degenerate.

    Identical cost rows give identical cells; only the lowest index of such
    a group can be Pareto.
    """
    C = game.cost
    out = []
    for i in range(game.n_actions):
        rows = cell_constraints(game, i)
        feasible, _, _ = cell_feasible(game, [(r, False) for r in rows], tol)
        if not feasible:
            out.append(DOMINATED)
            continue
        duplicate_below = any(np.abs(C[i] - C[k]).max() <= _ZERO_ROW for k in range(i))
        if rows.size:
            s, _ = max_slack_over_simplex(rows, interior=True)
        else:
            s = float("inf")
        full = s > tol
        out.append(PARETO if full and not duplicate_below else DEGENERATE)
    return out


def neighbor_pairs(game: Game, classification: list[str], tol: float = LP_TOL) -> list[Pair]:
    """Pareto pairs whose cells meet in an (M-2)-dimensional face."""
    pareto = [i for i, c in enumerate(classification) if c == PARETO]
    m = game.n_outcomes
    pairs = []
    for i, j in combinations(pareto, 2):
        hard = np.vstack([cell_constraints(game, i), cell_constraints(game, j)])
        diff = game.cost[i] - game.cost[j]
        if affine_dimension(m, hard, diff[None, :], tol) == m - 2:
            pairs.append((i, j))
    return pairs


def neighborhood_action_set(game: Game, i: int, j: int, tol: float = LP_TOL) -> list[int]:
    """Actions k whose cell contains the common face of i and j.

    On that face c_i p is the minimum cost, so k qualifies iff
    max (c_k - c_i) p over the face is <= tol.
    """
    i, j = min(i, j), max(i, j)
    hard = np.vstack([cell_constraints(game, i), cell_constraints(game, j)])
    hard = hard if hard.size else None
    out = []
    for k in range(game.n_actions):
        if k in (i, j):
            out.append(k)
            continue
        v, _ = maximize_over_simplex(game.cost[k] - game.cost[i], hard)
        if np.isfinite(v) and v <= tol:
            out.append(k)
    return out


def _solve_observer(game: Game, subset: tuple[int, ...], target: np.ndarray) -> list[np.ndarray] | None:
    A = np.hstack([game.signal_matrices[a].T for a in subset])
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    if np.abs(A @ coef - target).max() > RESIDUAL_TOL:
        return None
    out, pos = [], 0
    for a in subset:
        k = game.sigmas[a]
        out.append(coef[pos : pos + k])
        pos += k
    return out


def observer_decomposition(
    game: Game, pairs: list[Pair]
) -> tuple[dict[Pair, list[int]], dict[tuple[Pair, int], np.ndarray], np.ndarray]:
    """Smallest observer set per pair with minimum-norm observer vectors.

    Subsets of the informative actions are tried first, by increasing size,
    then subsets of all actions.
    """
    sets: dict[Pair, list[int]] = {}
    vectors: dict[tuple[Pair, int], np.ndarray] = {}
    weights = np.zeros(game.n_actions)
    all_actions = tuple(range(game.n_actions))
    for pair in pairs:
        i, j = pair
        target = game.cost[i] - game.cost[j]
        found = None
        for pool in (game.informative, all_actions):
            for size in range(1, len(pool) + 1):
                for subset in combinations(pool, size):
                    sol = _solve_observer(game, subset, target)
                    if sol is not None:
                        found = (subset, sol)
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise StructureError(f"pair {{{i + 1},{j + 1}}} has no observer set; game is not observable")
        subset, sol = found
        sets[pair] = list(subset)
        for a, v in zip(subset, sol):
            vectors[(pair, a)] = v
            weights[a] = max(weights[a], float(np.abs(v).max(initial=0.0)))
    return sets, vectors, weights


@dataclass
class StructureReport:
    classification: list[str]
    pareto: list[int]
    neighbors: list[Pair]
    neighborhood_sets: dict[Pair, list[int]]
    observer_sets: dict[Pair, list[int]]
    observer_vectors: dict[tuple[Pair, int], np.ndarray]
    weights: np.ndarray
    cells: list[np.ndarray] = field(repr=False, default_factory=list)

    def to_json(self, game: Game) -> dict[str, Any]:
        """1-based JSON view; pair keys are "i,j"."""

        def key(p: Pair) -> str:
            return f"{p[0] + 1},{p[1] + 1}"

        return {
            "n_actions": game.n_actions,
            "n_outcomes": game.n_outcomes,
            "signal_matrices": {str(a + 1): S.astype(int).tolist() for a, S in enumerate(game.signal_matrices)},
            "informative": [a + 1 for a in game.informative],
            "sigma": game.sigma,
            "classification": {str(a + 1): c for a, c in enumerate(self.classification)},
            "pareto": [a + 1 for a in self.pareto],
            "dominated": [a + 1 for a, c in enumerate(self.classification) if c == DOMINATED],
            "degenerate": [a + 1 for a, c in enumerate(self.classification) if c == DEGENERATE],
            "neighbors": [[i + 1, j + 1] for i, j in self.neighbors],
            "neighborhood_sets": {key(p): [a + 1 for a in s] for p, s in self.neighborhood_sets.items()},
            "observer_sets": {key(p): [a + 1 for a in s] for p, s in self.observer_sets.items()},
            "observer_vectors": {
                key(p): {str(a + 1): self.observer_vectors[(p, a)].tolist() for a in s}
                for p, s in self.observer_sets.items()
            },
            "weights": {str(a + 1): float(w) for a, w in enumerate(self.weights)},
        }


def analyze(game: Game, tol: float = LP_TOL) -> StructureReport:
    classification = classify_actions(game, tol)
    pareto = [i for i, c in enumerate(classification) if c == PARETO]
    pairs = neighbor_pairs(game, classification, tol)
    nplus = {p: neighborhood_action_set(game, *p, tol=tol) for p in pairs}
    sets, vectors, weights = observer_decomposition(game, pairs) if pairs else ({}, {}, np.zeros(game.n_actions))
    cells = [cell_constraints(game, i) for i in range(game.n_actions)]
    return StructureReport(classification, pareto, pairs, nplus, sets, vectors, weights, cells)
