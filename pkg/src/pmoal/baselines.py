"""Reference query strategies for label-efficient games.

Each baseline keeps a single exploitation network trained on the labels it
has bought, predicts its argmax class, and differs only in when it plays
the expert action.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agent import predict_from_distributions, should_train
from .game import Game, GameError, Symbol, expert_action
from .neural import EENets, NetworkConfig

KINDS = ("margin", "cesa", "random", "always_query")


@dataclass
class BaselineConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    threshold: float = 1.0  # margin: query while the top-two gap < threshold / sqrt(1 + queries)
    query_prob: float = 0.5  # random
    every_round_until: int = 50
    mid_period: int = 50
    mid_until: int = 1000
    late_period: int = 500

    def __post_init__(self) -> None:
        if isinstance(self.network, dict):
            self.network = NetworkConfig(**self.network)


class QueryBaseline:
    name = "baseline"
    sweep = False  # play every action once before the strategy kicks in

    def __init__(self, game: Game, input_dim: int, config: BaselineConfig | None = None, seed: int = 0):
        self.expert = expert_action(game)
        m = game.n_outcomes
        if game.n_actions != m + 1 or self.expert != m:
            raise GameError("baselines need a single-expert label-efficient game")
        self.game = game
        self.config = config or BaselineConfig()
        net_cfg = NetworkConfig(**{**self.config.network.__dict__, "seed": seed})
        self.nets = EENets(game, input_dim, net_cfg)
        self.rng = np.random.default_rng([seed, 2])
        self.t = 1
        self.queries = 0
        self._pred: int | None = None

    def wants_query(self, dist: np.ndarray) -> bool:
        raise NotImplementedError

    def act(self, x: np.ndarray) -> int:
        dist = self.nets.f1_distributions(x[None, :])
        self._pred = int(predict_from_distributions(self.game, dist)[0])
        if self.sweep and self.t <= self.game.n_actions:
            return self.t - 1
        block = dist[0, self.game.offsets[self.expert] :][: self.game.sigmas[self.expert]]
        return self.expert if self.wants_query(block) else self._pred

    def observe(self, x: np.ndarray, action: int, symbol: Symbol) -> None:
        if symbol[0] != action:
            raise GameError(f"symbol {symbol} cannot be produced by action {action + 1}")
        if action == self.expert:
            self.queries += 1
            self.on_label(int(np.argmax(self.game.signal_matrices[action][symbol[1]])))
        self.nets.add_sample(x, symbol)
        if should_train(self.t, self.game.n_actions, self.config) and self.nets.buffer_x:
            self.nets.train_exploitation()
        self.t += 1

    def on_label(self, label: int) -> None:
        pass

    def predict_classes(self, X: np.ndarray) -> np.ndarray:
        return predict_from_distributions(self.game, self.nets.f1_distributions(X))

    def predict_class(self, x: np.ndarray) -> int:
        return int(self.predict_classes(np.asarray(x)[None, :])[0])


def _top_two_gap(block: np.ndarray) -> float:
    s = np.sort(block)
    return float(s[-1] - s[-2])


class MarginBaseline(QueryBaseline):
    """Queries while the prediction margin is inside a threshold that shrinks with the label count."""

    name = "margin"
    sweep = True

    def wants_query(self, dist: np.ndarray) -> bool:
        return _top_two_gap(dist) < self.config.threshold / np.sqrt(1.0 + self.queries)


class CesaBaseline(QueryBaseline):
    """Randomised selective sampling: query with probability b / (b + |margin|).

    b is the running error rate on queried rounds (Laplace-smoothed), so
    label acquisition follows the strategy's own mistake rate.
    """

    name = "cesa"
    sweep = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.mistakes = 0

    def wants_query(self, dist: np.ndarray) -> bool:
        b = (1.0 + self.mistakes) / (2.0 + self.queries)
        gap = _top_two_gap(dist)
        return bool(self.rng.random() < b / (b + gap))

    def on_label(self, label: int) -> None:
        if self._pred is not None and self._pred != label:
            self.mistakes += 1


class RandomBaseline(QueryBaseline):
    name = "random"

    def wants_query(self, dist: np.ndarray) -> bool:
        return bool(self.rng.random() < self.config.query_prob)


class AlwaysQueryBaseline(QueryBaseline):
    name = "always_query"

    def wants_query(self, dist: np.ndarray) -> bool:
        return True


class OracleAgent:
    """Cheats by reading the env's hidden label; plays the cheapest action for it."""

    name = "oracle"

    def __init__(self, game: Game, env):
        self.game = game
        self.env = env

    def act(self, x: np.ndarray) -> int:
        return int(np.argmin(self.game.cost[:, self.env.current_label]))

    def observe(self, x, action, symbol) -> None:
        pass

    def predict_classes(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(len(X), dtype=int)


_REGISTRY = {
    "margin": MarginBaseline,
    "cesa": CesaBaseline,
    "random": RandomBaseline,
    "always_query": AlwaysQueryBaseline,
}


def make_baseline(kind: str, game: Game, input_dim: int, config: BaselineConfig | None = None, seed: int = 0) -> QueryBaseline:
    try:
        cls = _REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown baseline {kind!r}; expected one of {', '.join(KINDS)}") from None
    return cls(game, input_dim, config, seed)
