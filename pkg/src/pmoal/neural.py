"""Bias-free ReLU MLPs with hand-written backprop and Adam, assembled into EENets.

f1 (exploitation) maps an observation to the flattened feedback
distributions of the informative actions. f2 (exploration) maps the
end-to-end embedding of f1 to the residual e(h) - f1(x).
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .game import Game, Symbol, encode_symbol

NORM_EPS = 1e-12
RESIDUAL_MODES = ("post", "pre", "online")


@dataclass
class NetworkConfig:
    width: int = 100
    depth: int = 2
    lr1: float = 1e-3
    lr2: float = 1e-3
    epochs1: int = 40
    epochs2: int = 40
    batch_size: int = 64
    block: int = 51
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    # f2 targets e(h) - f1(x) evaluated with: "post" the freshly trained f1, "pre" the f1 before
    # this update, "online" the f1 of the round each sample arrived (stored once, never refreshed)
    residual: str = "post"

    def __post_init__(self) -> None:
        if self.residual not in RESIDUAL_MODES:
            raise ValueError(f"residual must be one of {RESIDUAL_MODES}")


class Mlp:
    """W^L relu(W^{L-1} ... relu(W^1 x)); rows of X are samples."""

    def __init__(self, sizes: list[int], rng: np.random.Generator | None = None):
        if len(sizes) < 3:
            raise ValueError("an MLP needs depth >= 2 (at least one hidden layer)")
        self.sizes = list(sizes)
        if rng is None:
            self.weights = [np.zeros((o, i)) for i, o in zip(sizes[:-1], sizes[1:])]
        else:
            self.weights = [rng.normal(0.0, math.sqrt(2.0 / i), size=(o, i)) for i, o in zip(sizes[:-1], sizes[1:])]

    @property
    def depth(self) -> int:
        return len(self.weights)

    def forward(self, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        hs, pre = [X], []
        h = X
        for W in self.weights[:-1]:
            a = h @ W.T
            pre.append(a)
            h = np.maximum(a, 0.0)
            hs.append(h)
        return h @ self.weights[-1].T, hs, pre

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]

    def backward(self, hs: list[np.ndarray], pre: list[np.ndarray], grad_out: np.ndarray) -> list[np.ndarray]:
        grads = [np.empty(0)] * self.depth
        g = grad_out
        grads[-1] = g.T @ hs[-1]
        g = g @ self.weights[-1]
        for layer in range(self.depth - 2, -1, -1):
            g = g * (pre[layer] > 0.0)
            grads[layer] = g.T @ hs[layer]
            if layer:
                g = g @ self.weights[layer]
        return grads


def squared_loss(net: Mlp, X: np.ndarray, Y: np.ndarray) -> float:
    return 0.5 * float(np.sum((net(X) - Y) ** 2))


def squared_loss_grad(net: Mlp, X: np.ndarray, Y: np.ndarray) -> list[np.ndarray]:
    out, hs, pre = net.forward(X)
    return net.backward(hs, pre, out - Y)


class Adam:
    def __init__(self, shapes: list[tuple[int, ...]], lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def block_reduce(V: np.ndarray, block: int) -> np.ndarray:
    """Average consecutive blocks of ``block`` columns; the last block may be shorter."""
    V = np.atleast_2d(V)
    n = V.shape[1]
    starts = np.arange(0, n, block)
    lengths = np.minimum(starts + block, n) - starts
    return np.add.reduceat(V, starts, axis=1) / lengths


def reduced_embedding_dim(width: int, sigma: int, block: int) -> int:
    return width + math.ceil(sigma * width / block)


class EENets:
    """Exploitation/exploration network pair plus its replay buffer."""

    def __init__(self, game: Game, input_dim: int, config: NetworkConfig, zero: bool = False):
        if input_dim < 1:
            raise ValueError("input dimension must be >= 1")
        if game.sigma < 2:
            raise ValueError("game needs at least 2 valid feedback symbols")
        if config.width < 1 or config.depth < 2 or config.block < 1:
            raise ValueError("need width >= 1, depth >= 2, block >= 1")
        self.game = game
        self.config = config
        self.input_dim = input_dim
        self.sigma = game.sigma
        self.embed_dim = reduced_embedding_dim(config.width, self.sigma, config.block)
        init_rng, train_rng = np.random.default_rng(config.seed).spawn(2)
        self.rng = train_rng
        wrng = None if zero else init_rng
        m, L = config.width, config.depth
        self.f1 = Mlp([input_dim] + [m] * (L - 1) + [self.sigma], wrng)
        self.f2 = Mlp([self.embed_dim] + [m] * (L - 1) + [self.sigma], wrng)
        self.opt1 = self._adam(self.f1, config.lr1)
        self.opt2 = self._adam(self.f2, config.lr2)
        self.buffer_x: list[np.ndarray] = []
        self.buffer_y: list[np.ndarray] = []
        self.buffer_r: list[np.ndarray] = []
        self.buffer_phi: list[np.ndarray] = []

    def _adam(self, net: Mlp, lr: float) -> Adam:
        c = self.config
        return Adam([w.shape for w in net.weights], lr, c.beta1, c.beta2, c.adam_eps)

    # inference -----------------------------------------------------------

    def _check(self, X: np.ndarray, dim: int) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != dim:
            raise ValueError(f"expected input dimension {dim}, got {X.shape[-1]}")
        return X

    def f1_distributions(self, X: np.ndarray) -> np.ndarray:
        """Raw f1 output with each informative block clamped to [0, 1] and renormalised."""
        X = np.atleast_2d(self._check(X, self.input_dim))
        raw = self.f1(X)
        out = np.clip(raw, 0.0, 1.0)
        for _, sl in self.game.blocks():
            blk = out[:, sl]
            s = blk.sum(axis=1, keepdims=True)
            k = blk.shape[1]
            out[:, sl] = np.where(s > 0.0, blk / np.where(s > 0.0, s, 1.0), 1.0 / k)
        return out

    def forward_f1(self, x: np.ndarray) -> list[np.ndarray]:
        """Per-action feedback distribution estimates; uninformative actions get [1]."""
        flat = self.f1_distributions(self._check(x, self.input_dim)[None, :])[0]
        pi = [np.ones(1) for _ in range(self.game.n_actions)]
        for a, sl in self.game.blocks():
            pi[a] = flat[sl]
        return pi

    def embed_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(self._check(X, self.input_dim))
        _, hs, _ = self.f1.forward(X)
        first = hs[1]
        # d(sum f1)/dW^L has every one of its sigma rows equal to the last hidden layer
        grad = np.tile(hs[-1], (1, self.sigma))
        phi = np.hstack([first, block_reduce(grad, self.config.block)])
        norm = np.linalg.norm(phi, axis=1, keepdims=True)
        return np.where(norm >= NORM_EPS, phi / np.where(norm >= NORM_EPS, norm, 1.0), phi)

    def embed(self, x: np.ndarray) -> np.ndarray:
        return self.embed_batch(np.asarray(x, dtype=float)[None, :])[0]

    def forward_f2(self, phi: np.ndarray) -> np.ndarray:
        """Worst-case uncertainty per action: max of the action's f2 block, floored at 0."""
        raw = self.f2(self._check(phi, self.embed_dim)[None, :])[0]
        w = np.zeros(self.game.n_actions)
        for a, sl in self.game.blocks():
            w[a] = max(0.0, float(raw[sl].max()))
        return w

    # training ------------------------------------------------------------

    def add_sample(self, x: np.ndarray, symbol: Symbol) -> bool:
        """Store (x, e(h)) if h is a valid symbol; returns whether it was stored."""
        if not self.game.is_valid_symbol(symbol):
            return False
        x = np.asarray(x, dtype=float)
        e = encode_symbol(self.game, symbol)
        self.buffer_x.append(x)
        self.buffer_y.append(e)
        self.buffer_r.append(e - self.f1(x[None, :])[0])
        self.buffer_phi.append(self.embed(x))
        return True

    def _fit(self, net: Mlp, opt: Adam, X: np.ndarray, Y: np.ndarray, epochs: int) -> None:
        n, bs = X.shape[0], self.config.batch_size
        for _ in range(epochs):
            perm = self.rng.permutation(n)
            for start in range(0, n, bs):
                idx = perm[start : start + bs]
                opt.step(net.weights, squared_loss_grad(net, X[idx], Y[idx]))

    def train_exploitation(self) -> None:
        if not self.buffer_x:
            raise ValueError("replay buffer is empty")
        X, Y = np.array(self.buffer_x), np.array(self.buffer_y)
        self._fit(self.f1, self.opt1, X, Y, self.config.epochs1)

    def train_exploration(self) -> None:
        if not self.buffer_x:
            raise ValueError("replay buffer is empty")
        X, Y = np.array(self.buffer_x), np.array(self.buffer_y)
        phi = self.embed_batch(X)
        residual = Y - self.f1(X)
        self._fit(self.f2, self.opt2, phi, residual, self.config.epochs2)

    def train(self) -> None:
        mode = self.config.residual
        if mode == "pre":
            X, Y = np.array(self.buffer_x), np.array(self.buffer_y)
            phi, residual = self.embed_batch(X), Y - self.f1(X)
            self.train_exploitation()
            self._fit(self.f2, self.opt2, phi, residual, self.config.epochs2)
        elif mode == "online":
            self.train_exploitation()
            self._fit(self.f2, self.opt2, np.array(self.buffer_phi), np.array(self.buffer_r), self.config.epochs2)
        else:
            self.train_exploitation()
            self.train_exploration()

    # persistence -----------------------------------------------------------

    def save_weights(self, path: str | Path) -> None:
        """Little-endian float64 payload behind a length-prefixed JSON shape header."""
        arrays = self.f1.weights + self.f2.weights
        header = json.dumps(
            {
                "f1": [list(w.shape) for w in self.f1.weights],
                "f2": [list(w.shape) for w in self.f2.weights],
                "config": asdict(self.config),
            }
        ).encode()
        with open(path, "wb") as fh:
            fh.write(struct.pack("<Q", len(header)))
            fh.write(header)
            for w in arrays:
                fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())

    def load_weights(self, path: str | Path) -> None:
        with open(path, "rb") as fh:
            (n,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(n))
            payload = np.frombuffer(fh.read(), dtype="<f8")
        pos = 0
        for net, shapes in ((self.f1, header["f1"]), (self.f2, header["f2"])):
            if [list(w.shape) for w in net.weights] != shapes:
                raise ValueError("weight file shapes do not match this network")
            for k, shape in enumerate(shapes):
                size = int(np.prod(shape))
                net.weights[k] = payload[pos : pos + size].reshape(shape).astype(float)
                pos += size


def init_networks(game: Game, input_dim: int, config: NetworkConfig) -> EENets:
    return EENets(game, input_dim, config)
