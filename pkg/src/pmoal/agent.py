"""NeuralCBP: confidence-bound partial monitoring driven by EENets."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .game import Game, GameError, Symbol, expert_action
from .neural import EENets, NetworkConfig
from .structure import LP_TOL, Pair, StructureReport, analyze, cell_feasible

log = logging.getLogger(__name__)


@dataclass
class AgentConfig:
    lam: float = 1.0
    alpha: float = 1.01
    tol: float = LP_TOL
    norm: str = "inf"  # observer-vector norm in the confidence width: "inf" or "2"
    network: NetworkConfig = field(default_factory=NetworkConfig)
    every_round_until: int = 50
    mid_period: int = 50
    mid_until: int = 1000
    late_period: int = 500

    def __post_init__(self) -> None:
        if isinstance(self.network, dict):
            self.network = NetworkConfig(**self.network)
        if self.lam <= 0:
            raise ValueError("lam must be > 0")
        if self.alpha <= 1:
            raise ValueError("alpha must be > 1")
        if self.norm not in ("inf", "2"):
            raise ValueError("norm must be 'inf' or '2'")


def should_train(t: int, n_actions: int, cfg: AgentConfig) -> bool:
    """Update schedule: every round early, then every mid_period, then every late_period."""
    if t <= n_actions:
        return False
    if t <= cfg.every_round_until:
        return True
    if t <= cfg.mid_until:
        return t % cfg.mid_period == 0
    return t % cfg.late_period == 0


def play_rate(t: int, alpha: float) -> float:
    if t <= 1:
        return 0.0
    return alpha ** (1 / 3) * t ** (2 / 3) * math.log(t) ** (1 / 3)


def sherman_morrison(G_inv: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Inverse of (G + phi phi^T) given G^{-1}."""
    u = G_inv @ phi
    return G_inv - np.outer(u, u) / (1.0 + phi @ u)


@dataclass
class RoundDecision:
    t: int
    action: int
    confident: list[Pair] = field(default_factory=list)
    pareto_t: list[int] = field(default_factory=list)
    neighbors_t: list[Pair] = field(default_factory=list)
    neighborhood_t: list[int] = field(default_factory=list)
    observers_t: list[int] = field(default_factory=list)
    underplayed: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)
    estimates: dict[Pair, tuple[float, float]] = field(default_factory=dict)
    fallback: bool = False
    forced: bool = False

    def trace(self, queried: bool) -> dict[str, Any]:
        return {
            "t": self.t,
            "action": self.action + 1,
            "forced": self.forced,
            "fallback": self.fallback,
            "sizes": {
                "U": len(self.confident),
                "P": len(self.pareto_t),
                "N": len(self.neighbors_t),
                "Nplus": len(self.neighborhood_t),
                "V": len(self.observers_t),
                "R": len(self.underplayed),
                "S": len(self.candidates),
            },
            "pairs": {f"{i + 1},{j + 1}": {"delta": d, "z": z} for (i, j), (d, z) in self.estimates.items()},
            "queried": queried,
        }


class NeuralCBP:
    name = "neuralcbp"

    def __init__(
        self,
        game: Game,
        input_dim: int,
        config: AgentConfig | None = None,
        seed: int = 0,
        report: StructureReport | None = None,
    ):
        self.game = game
        self.config = config or AgentConfig()
        self.report = report if report is not None else analyze(game, self.config.tol)
        net_cfg = NetworkConfig(**{**self.config.network.__dict__, "seed": seed})
        self.nets = EENets(game, input_dim, net_cfg)
        dim = self.nets.embed_dim
        self.G_inv = [np.eye(dim) / self.config.lam for _ in range(game.n_actions)]
        self.t = 1
        self.fallbacks = 0
        self._likely_cache: dict[tuple, tuple[list[int], list[Pair], bool]] = {}
        self._phi: np.ndarray | None = None
        self.last_decision: RoundDecision | None = None
        r = self.report
        ordnorm = np.inf if self.config.norm == "inf" else 2
        self._vnorm = {
            (p, a): float(np.linalg.norm(r.observer_vectors[(p, a)], ordnorm)) for p in r.neighbors for a in r.observer_sets[p]
        }
        self._eta = r.weights ** (2 / 3)

    # estimation ------------------------------------------------------------

    def pair_estimates(self, pi_hat: list[np.ndarray], w: np.ndarray) -> dict[Pair, tuple[float, float]]:
        r = self.report
        out = {}
        for p in r.neighbors:
            delta = sum(float(r.observer_vectors[(p, a)] @ pi_hat[a]) for a in r.observer_sets[p])
            z = sum(self._vnorm[(p, a)] * float(w[a]) for a in r.observer_sets[p])
            out[p] = (delta, z)
        return out

    def likely_sets(self, estimates: dict[Pair, tuple[float, float]]) -> tuple[list[Pair], list[int], list[Pair], bool]:
        """Confident pairs U(t), then the Pareto actions and neighbor pairs compatible with D(t)."""
        confident = [p for p, (d, z) in estimates.items() if abs(d) >= z and d != 0.0]
        r = self.report
        if not confident:
            return [], list(r.pareto), list(r.neighbors), False
        key = tuple((p, estimates[p][0] > 0) for p in confident)
        if key not in self._likely_cache:
            self._likely_cache[key] = self._restrict(key)
        pareto_t, neighbors_t, fallback = self._likely_cache[key]
        return confident, list(pareto_t), list(neighbors_t), fallback

    def _restrict(self, key: tuple) -> tuple[list[int], list[Pair], bool]:
        C, r, tol = self.game.cost, self.report, self.config.tol
        # sign(delta) (c_i - c_j) p > 0  <=>  -sign(delta) (c_i - c_j) p < 0
        strict = [(-(1.0 if pos else -1.0) * (C[i] - C[j]), True) for (i, j), pos in key]
        pareto_t = [
            a for a in r.pareto if cell_feasible(self.game, strict + [(v, False) for v in r.cells[a]], tol)[0]
        ]
        neighbors_t = [
            (i, j)
            for i, j in r.neighbors
            if cell_feasible(self.game, strict + [(v, False) for v in (*r.cells[i], *r.cells[j])], tol)[0]
        ]
        if not pareto_t:
            log.debug("D(t) excludes every cell; reverting to the full structure")
            return list(r.pareto), list(r.neighbors), True
        return pareto_t, neighbors_t, False

    def pseudo_counts(self, phi: np.ndarray) -> np.ndarray:
        out = np.empty(self.game.n_actions)
        for a, Gi in enumerate(self.G_inv):
            q = float(phi @ Gi @ phi)
            out[a] = 1.0 / q if q > 0.0 else math.inf
        return out

    # decision loop -----------------------------------------------------------

    def select(self, x: np.ndarray) -> RoundDecision:
        t, n = self.t, self.game.n_actions
        self._phi = self.nets.embed(x)
        if t <= n:
            return RoundDecision(t, t - 1, forced=True)
        pi_hat = self.nets.forward_f1(x)
        w = self.nets.forward_f2(self._phi)
        est = self.pair_estimates(pi_hat, w)
        confident, pareto_t, neighbors_t, fallback = self.likely_sets(est)
        if fallback:
            self.fallbacks += 1
        r = self.report
        nplus = sorted({k for p in neighbors_t for k in r.neighborhood_sets[p]})
        observers = sorted({a for p in neighbors_t for a in r.observer_sets[p]})
        counts = self.pseudo_counts(self._phi)
        rate = play_rate(t, self.config.alpha)
        underplayed = [a for a in range(n) if counts[a] < self._eta[a] * rate]
        S = sorted(set(pareto_t) | set(nplus) | (set(observers) & set(underplayed)))
        scores = np.array([r.weights[a] * w[a] for a in S])
        action = S[int(np.argmax(scores))]  # argmax keeps the lowest index on ties
        return RoundDecision(t, action, confident, pareto_t, neighbors_t, nplus, observers, underplayed, S, est, fallback)

    def act(self, x: np.ndarray) -> int:
        self.last_decision = self.select(x)
        return self.last_decision.action

    def observe(self, x: np.ndarray, action: int, symbol: Symbol) -> None:
        if symbol[0] != action or not 0 <= symbol[1] < self.game.sigmas[action]:
            raise GameError(f"symbol {symbol} cannot be produced by action {action + 1}")
        phi = self._phi if self._phi is not None else self.nets.embed(x)
        self.nets.add_sample(x, symbol)
        self.G_inv[action] = sherman_morrison(self.G_inv[action], phi)
        if should_train(self.t, self.game.n_actions, self.config) and self.nets.buffer_x:
            self.nets.train()
        self._phi = None
        self.t += 1

    # evaluation ------------------------------------------------------------

    def predict_classes(self, X: np.ndarray) -> np.ndarray:
        """0-based class per row from the expert action's predicted feedback distribution."""
        return predict_from_distributions(self.game, self.nets.f1_distributions(X))

    def predict_class(self, x: np.ndarray) -> int:
        return int(self.predict_classes(np.asarray(x)[None, :])[0])


def predict_from_distributions(game: Game, flat: np.ndarray) -> np.ndarray:
    e = expert_action(game)
    block = flat[:, game.offsets[e] : game.offsets[e] + game.sigmas[e]]
    # column y holds the probability of the symbol outcome y produces; argmax ties go to the lowest class
    per_outcome = block[:, game.feedback[e]]
    return np.argmax(per_outcome, axis=1)
