"""Single-hidden-layer perceptron trained by mini-batch backpropagation.

tanh hidden activation, softmax output, cross-entropy loss.  Weights start
from the seeded generator at scale 1/sqrt(fan-in); batches are reshuffled
every epoch from the same stream.  An epoch that raises the full training
loss is rolled back with a halved step, and training stops early once the
loss improves by less than 1e-7 over 10 epochs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .linear import GdConfig, Standardization, add_bias, _one_hot
from .numeric import SeededRng, argmax_lowest, softmax


@dataclass(frozen=True, eq=False)
class MlpModel:
    w1: np.ndarray  # h x (d+1), bias folded into the last column
    w2: np.ndarray  # K x (h+1)
    standardization: Standardization
    h: int
    n_classes: int
    activation: str = "tanh"
    loss_history: tuple[float, ...] = ()

    @property
    def d(self) -> int:
        return int(self.w1.shape[1]) - 1


def mlp_loss_and_grads(
    w1: np.ndarray, w2: np.ndarray, xb: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy (+ L2 on non-bias weights) and its backprop gradients."""
    n = xb.shape[0]
    a1 = np.tanh(xb @ w1.T)
    ab = add_bias(a1)
    probs = softmax(ab @ w2.T)
    nll = -np.log(np.maximum(probs[np.arange(n), y], 1e-300)).mean()
    penalty = 0.5 * l2 * (np.sum(w1[:, :-1] ** 2) + np.sum(w2[:, :-1] ** 2))

    delta = (probs - _one_hot(y, w2.shape[0])) / n
    g2 = delta.T @ ab
    g2[:, :-1] += l2 * w2[:, :-1]
    dz = (delta @ w2[:, :-1]) * (1.0 - a1**2)
    g1 = dz.T @ xb
    g1[:, :-1] += l2 * w1[:, :-1]
    return float(nll + penalty), g1, g2


def mlp_loss(w1: np.ndarray, w2: np.ndarray, xb: np.ndarray, y: np.ndarray, l2: float) -> float:
    return mlp_loss_and_grads(w1, w2, xb, y, l2)[0]


def fit_mlp(
    dataset: Dataset,
    h: int = 16,
    cfg: GdConfig | None = None,
    batch_size: int = 32,
) -> MlpModel:
    cfg = cfg or GdConfig(learning_rate=0.1, epochs=500, l2=1e-4)
    if h < 1:
        raise ValueError("hidden width must be at least 1")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    if dataset.n == 0:
        raise ValueError("empty dataset")
    if np.unique(dataset.y).size < 2:
        raise ValueError("single-class dataset")

    k = dataset.schema.n_classes
    std = Standardization.fit(dataset.x)
    xb = add_bias(std.apply(dataset.x))
    y = dataset.y
    n, d1 = xb.shape

    rng = SeededRng(cfg.seed)
    w1 = np.asarray(rng.normal((h, d1))) / np.sqrt(d1)
    w2 = np.asarray(rng.normal((k, h + 1))) / np.sqrt(h + 1)

    lr = cfg.learning_rate
    loss = mlp_loss(w1, w2, xb, y, cfg.l2)
    history = [loss]
    best = loss
    stale = 0
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        snap1, snap2 = w1.copy(), w2.copy()
        for start in range(0, n, batch_size):
            b = perm[start : start + batch_size]
            _, g1, g2 = mlp_loss_and_grads(w1, w2, xb[b], y[b], cfg.l2)
            w1 -= lr * g1
            w2 -= lr * g2
        new_loss = mlp_loss(w1, w2, xb, y, cfg.l2)
        if new_loss > loss:
            w1, w2 = snap1, snap2
            lr *= 0.5
            history.append(loss)
            if lr < 1e-15:
                break
        else:
            loss = new_loss
            history.append(loss)
        if loss < best - 1e-7:
            best = loss
            stale = 0
        else:
            stale += 1
            if stale >= 10:
                break

    return MlpModel(
        w1=w1,
        w2=w2,
        standardization=std,
        h=h,
        n_classes=k,
        loss_history=tuple(history),
    )


def predict_mlp(model: MlpModel, x) -> tuple[int, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"dimension mismatch: expected {model.d} features, got {x.shape}")
    z = np.append(model.standardization.apply(x), 1.0)
    hidden = np.append(np.tanh(model.w1 @ z), 1.0)
    probs = softmax(model.w2 @ hidden)
    return argmax_lowest(probs), probs


def predict_mlp_batch(model: MlpModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xb = add_bias(model.standardization.apply(x))
    hidden = add_bias(np.tanh(xb @ model.w1.T))
    probs = softmax(hidden @ model.w2.T)
    return np.argmax(probs, axis=1).astype(np.int64), probs
