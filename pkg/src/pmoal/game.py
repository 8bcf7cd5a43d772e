"""Partial monitoring games: cost/feedback matrices and derived signal structure.

Actions and outcomes are 0-based internally. Anything user-facing (JSON,
CLI output, class labels) is 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Hashable, Sequence

import numpy as np

SIMPLEX_TOL = 1e-9


class GameError(ValueError):
    """Invalid game definition or misuse of a game's symbol space."""


Symbol = tuple[int, int]  # (action row, index in that row's enumeration)


@dataclass(frozen=True, eq=False)
class Game:
    cost: np.ndarray  # (N, M) in [0, 1]
    feedback: np.ndarray  # (N, M) intra-row symbol index
    symbol_labels: tuple[tuple[Hashable, ...], ...]  # original labels, per row, in enumeration order
    signal_matrices: tuple[np.ndarray, ...]
    informative: tuple[int, ...]
    offsets: dict[int, int]  # start of each informative block in the sigma-dim encoding

    @property
    def n_actions(self) -> int:
        return self.cost.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.cost.shape[1]

    @property
    def sigmas(self) -> tuple[int, ...]:
        return tuple(s.shape[0] for s in self.signal_matrices)

    @property
    def sigma(self) -> int:
        return sum(self.sigmas[i] for i in self.informative)

    def symbol(self, action: int, outcome: int) -> Symbol:
        return (action, int(self.feedback[action, outcome]))

    def row_symbols(self, action: int) -> list[Symbol]:
        return [(action, u) for u in range(self.sigmas[action])]

    def blocks(self) -> list[tuple[int, slice]]:
        """(action, slice) for each informative action's block of the flat encoding."""
        return [(i, slice(self.offsets[i], self.offsets[i] + self.sigmas[i])) for i in self.informative]

    def is_valid_symbol(self, symbol: Symbol) -> bool:
        a, u = symbol
        return a in self.offsets and 0 <= u < self.sigmas[a]

    def to_dict(self) -> dict[str, Any]:
        return {
            "cost": self.cost.tolist(),
            "feedback": [
                [str(self.symbol_labels[i][self.feedback[i, y]]) for y in range(self.n_outcomes)]
                for i in range(self.n_actions)
            ],
        }


def build_game(cost: Any, feedback: Any) -> Game:
    """Validate C and H and derive symbol enumerations and signal matrices.

    Symbols are only compared within a row; a label reused across rows
    becomes two distinct symbols ``(row, index)``.
    """
    C = np.asarray(cost, dtype=float)
    if C.ndim != 2:
        raise GameError("cost must be a 2-d matrix")
    H = [list(row) for row in feedback]
    n, m = C.shape
    if len(H) != n or any(len(row) != m for row in H):
        raise GameError(f"feedback shape does not match cost shape {C.shape}")
    if n < 2:
        raise GameError("a game needs at least 2 actions")
    if m < 2:
        raise GameError("a game needs at least 2 outcomes")
    if not np.all(np.isfinite(C)) or C.min() < 0.0 or C.max() > 1.0:
        raise GameError("costs must lie in [0, 1]")

    index = np.zeros((n, m), dtype=int)
    labels: list[tuple[Hashable, ...]] = []
    signals: list[np.ndarray] = []
    for i, row in enumerate(H):
        seen: dict[Hashable, int] = {}
        for y, s in enumerate(row):
            if s not in seen:
                seen[s] = len(seen)
            index[i, y] = seen[s]
        labels.append(tuple(seen))
        S = np.zeros((len(seen), m))
        S[index[i], np.arange(m)] = 1.0
        signals.append(S)

    informative = tuple(i for i, S in enumerate(signals) if S.shape[0] >= 2)
    offsets: dict[int, int] = {}
    pos = 0
    for i in informative:
        offsets[i] = pos
        pos += signals[i].shape[0]

    C.setflags(write=False)
    index.setflags(write=False)
    for S in signals:
        S.setflags(write=False)
    return Game(C, index, tuple(labels), tuple(signals), informative, offsets)


@dataclass(frozen=True)
class CostSpec:
    n_classes: int
    query_cost: float
    error_costs: np.ndarray

    def __post_init__(self) -> None:
        E = np.asarray(self.error_costs, dtype=float)
        object.__setattr__(self, "error_costs", E)
        if self.n_classes < 2:
            raise GameError("n_classes must be at least 2")
        if E.shape != (self.n_classes, self.n_classes):
            raise GameError(f"error_costs must be {self.n_classes}x{self.n_classes}")
        if np.any(np.diag(E) != 0.0):
            raise GameError("error_costs diagonal must be exactly 0")
        if E.min() < 0.0 or E.max() > 1.0:
            raise GameError("error_costs must lie in [0, 1]")
        if not 0.0 <= self.query_cost <= 1.0:
            raise GameError("query_cost must lie in [0, 1]")

    @classmethod
    def uniform(cls, n_classes: int, query_cost: float = 1.0, error_cost: float = 1.0) -> CostSpec:
        E = error_cost * (1.0 - np.eye(n_classes))
        return cls(n_classes, query_cost, E)

    @classmethod
    def fp_sensitive(cls, fn_cost: float = 0.5, fp_cost: float = 1.0, query_cost: float = 1.0) -> CostSpec:
        """Binary game with class 2 as the positive class.

        Row = predicted class, column = true class, so entry [0, 1] is a
        false negative and [1, 0] a false positive.
        """
        return cls(2, query_cost, np.array([[0.0, fn_cost], [fp_cost, 0.0]]))


def make_label_efficient(spec: CostSpec) -> Game:
    """Single-expert label-efficient game: M predict actions plus one query action."""
    m = spec.n_classes
    cost = np.vstack([spec.error_costs, np.full((1, m), float(spec.query_cost))])
    feedback: list[list[str]] = [[f"pred{i + 1}"] * m for i in range(m)]
    feedback.append([f"class{y + 1}" for y in range(m)])
    return build_game(cost, feedback)


def expert_action(game: Game) -> int:
    """Index of the first action that reveals the outcome (sigma_a == M)."""
    for a in game.informative:
        if game.sigmas[a] == game.n_outcomes:
            return a
    raise GameError("game has no expert action revealing every outcome")


def encode_symbol(game: Game, symbol: Symbol) -> np.ndarray:
    if not game.is_valid_symbol(symbol):
        raise GameError(f"symbol {symbol} is not produced by an informative action")
    e = np.zeros(game.sigma)
    a, u = symbol
    e[game.offsets[a] + u] = 1.0
    return e


def check_simplex(p: Sequence[float], m: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (m,):
        raise GameError(f"expected a distribution of length {m}")
    if p.min() < -SIMPLEX_TOL or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise GameError("vector is not on the probability simplex")
    return p


def expected_cost_diff(game: Game, i: int, j: int, p: Sequence[float]) -> float:
    p = check_simplex(p, game.n_outcomes)
    return float((game.cost[i] - game.cost[j]) @ p)


def game_from_json(obj: dict[str, Any]) -> Game:
    """Accepts either a raw game {"cost", "feedback"} or a CostSpec object."""
    if "cost" in obj and "feedback" in obj:
        return build_game(obj["cost"], obj["feedback"])
    if "n_classes" in obj:
        return make_label_efficient(cost_spec_from_json(obj))
    raise GameError("JSON must contain either cost+feedback or n_classes/query_cost/error_costs")


def cost_spec_from_json(obj: dict[str, Any]) -> CostSpec:
    try:
        return CostSpec(int(obj["n_classes"]), float(obj["query_cost"]), np.asarray(obj["error_costs"], dtype=float))
    except KeyError as exc:
        raise GameError(f"cost spec missing field {exc}") from None


def load_game(path: str | Path) -> Game:
    with open(path, encoding="utf-8") as fh:
        return game_from_json(json.load(fh))
