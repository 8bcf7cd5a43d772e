"""Observation streams for label-efficient-family games."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .game import Game, Symbol


class EnvError(ValueError):
    pass


class HorizonExhausted(RuntimeError):
    pass


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray  # 0-based labels


def gaussian_dataset(n_classes: int, dim: int, sep: float, n: int, rng: np.random.Generator) -> Dataset:
    """Unit-variance Gaussian clusters with exactly balanced classes.

    Means sit at pairwise distance ``sep``: on scaled axes when
    n_classes <= dim, otherwise on a circle in the first two coordinates.
    """
    if n_classes < 2 or dim < 1:
        raise EnvError("gaussian stream needs M >= 2 and d >= 1")
    means = np.zeros((n_classes, dim))
    if n_classes == 2:
        means[0, 0], means[1, 0] = -sep / 2, sep / 2
    elif n_classes <= dim:
        means[np.arange(n_classes), np.arange(n_classes)] = sep / math.sqrt(2)
    elif dim >= 2:
        radius = sep / (2 * math.sin(math.pi / n_classes))
        ang = 2 * math.pi * np.arange(n_classes) / n_classes
        means[:, 0], means[:, 1] = radius * np.cos(ang), radius * np.sin(ang)
    else:
        means[:, 0] = sep * np.arange(n_classes)
    y = rng.permutation(np.arange(n) % n_classes)
    X = means[y] + rng.standard_normal((n, dim))
    return Dataset(X, y)


def read_csv(path: str | Path, label_col: str, n_classes: int | None = None) -> Dataset:
    """Header CSV; ``label_col`` holds 1-based integer classes, every other column is a numeric feature."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise EnvError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise EnvError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    if label_col not in header:
        raise EnvError(f"label column {label_col!r} not in header")
    li = header.index(label_col)
    feats, labels = [], []
    for k, row in enumerate(body, start=2):
        if not row:
            continue
        try:
            feats.append([float(v) for c, v in enumerate(row) if c != li])
            lab = float(row[li])
        except ValueError:
            raise EnvError(f"non-numeric value on line {k}") from None
        if lab != int(lab):
            raise EnvError(f"label on line {k} is not an integer")
        labels.append(int(lab))
    y = np.array(labels) - 1
    hi = n_classes if n_classes is not None else y.max() + 1
    if y.min() < 0 or y.max() >= hi:
        raise EnvError(f"labels must lie in 1..{hi}")
    return Dataset(np.array(feats, dtype=float), y)


@dataclass
class StreamEnv:
    game: Game
    X: np.ndarray  # standardised training partition
    y: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    order: np.ndarray  # row index of the training partition for each round
    horizon: int
    t: int = 0
    regret: float = 0.0
    _open: bool = field(default=False, repr=False)

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    @property
    def current_label(self) -> int:
        if not self._open:
            raise EnvError("no open round")
        return int(self.y[self.order[self.t - 1]])

    def step(self) -> np.ndarray:
        if self.t >= self.horizon:
            raise HorizonExhausted(f"horizon {self.horizon} exhausted")
        self.t += 1
        self._open = True
        return self.X[self.order[self.t - 1]]

    def feedback(self, action: int) -> tuple[Symbol, float]:
        """Symbol H[action, y_t] and the regret increment against the best action for y_t."""
        y = self.current_label
        self._open = False
        C = self.game.cost
        inc = float(C[action, y] - C[:, y].min())
        self.regret += inc
        return self.game.symbol(action, y), inc


def _standardise(X_train: np.ndarray, X_test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = X_train.mean(axis=0)
    sd = X_train.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Xt = (X_train - mu) / sd
    # recentre to remove floating-point drift in the training mean
    Xt -= Xt.mean(axis=0)
    return Xt, (X_test - mu) / sd


def make_env(
    game: Game,
    data: Dataset,
    horizon: int,
    seed: int,
    test_frac: float = 0.15,
    replace: bool = False,
) -> StreamEnv:
    if not 0.0 <= test_frac < 1.0:
        raise EnvError("test_frac must lie in [0, 1)")
    if horizon < 1:
        raise EnvError("horizon must be >= 1")
    if data.y.min() < 0 or data.y.max() >= game.n_outcomes:
        raise EnvError(f"labels must lie in 1..{game.n_outcomes}")
    n = data.X.shape[0]
    rng = np.random.default_rng([seed, 0])
    perm = rng.permutation(n)
    n_test = int(round(test_frac * n))
    test, train = perm[:n_test], perm[n_test:]
    if train.size == 0:
        raise EnvError("empty training stream")
    if not replace and train.size < horizon:
        raise EnvError(f"need {horizon} training rows, have {train.size}; enable sampling with replacement")
    Xtr, Xte = _standardise(data.X[train], data.X[test])
    if replace:
        order = rng.integers(0, train.size, size=horizon)
    else:
        order = rng.permutation(train.size)[:horizon]
    return StreamEnv(game, Xtr, data.y[train], Xte, data.y[test], order, horizon)


def load_stream(
    game: Game,
    source: str | dict[str, Any],
    horizon: int,
    seed: int,
    test_frac: float = 0.15,
    label_col: str = "label",
    replace: bool = False,
) -> StreamEnv:
    """Build an env from a CSV path, a JSON synthetic-stream file, inline JSON, or a dict.

    Synthetic stream: {"kind": "gaussian", "M": .., "d": .., "sep": .., "n": optional}.
    """
    spec = _parse_source(source)
    if spec is None:
        data = read_csv(str(source), label_col, game.n_outcomes)
    else:
        if spec.get("kind") != "gaussian":
            raise EnvError(f"unknown synthetic kind {spec.get('kind')!r}")
        try:
            M, d, sep = int(spec["M"]), int(spec["d"]), float(spec["sep"])
        except KeyError as exc:
            raise EnvError(f"synthetic stream description missing {exc}") from None
        if M != game.n_outcomes:
            raise EnvError(f"synthetic stream has M={M}, game has {game.n_outcomes} outcomes")
        n = int(spec.get("n", math.ceil(horizon / (1.0 - test_frac)) + 1))
        data = gaussian_dataset(M, d, sep, n, np.random.default_rng([seed, 1]))
    return make_env(game, data, horizon, seed, test_frac, replace)


def _parse_source(source: str | dict[str, Any]) -> dict[str, Any] | None:
    if isinstance(source, dict):
        return source
    text = str(source).strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise EnvError(f"bad inline stream description: {exc}") from None
    if text.lower().endswith(".json"):
        try:
            with open(text, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise EnvError(f"cannot read stream description {text}: {exc}") from None
    return None
