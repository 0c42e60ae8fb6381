"""Linear classifiers trained by full-batch gradient descent.

Multiclass logistic regression uses a softmax head with cross-entropy (the
maximum-likelihood extension of the binary logit model); the SVM trains one
hinge-loss problem per class against the rest.  Both operate on z-scored
features and halve the step size whenever an update would increase the
training loss, which makes the recorded loss history non-increasing by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .numeric import argmax_lowest, softmax


@dataclass(frozen=True)
class GdConfig:
    """Gradient-descent hyperparameters shared by the iterative trainers."""

    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


@dataclass(frozen=True, eq=False)
class Standardization:
    """Per-feature z-scoring statistics captured at fit time."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardization":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std > 0, std, 1.0)  # constant columns pass through
        return cls(mean=mean, std=std)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.std


def add_bias(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.hstack([x, np.ones((x.shape[0], 1))])


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray  # K x (d+1), last column is the bias
    standardization: Standardization
    n_classes: int
    loss_history: tuple[float, ...] = ()

    @property
    def d(self) -> int:
        return int(self.weights.shape[1]) - 1


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: np.ndarray  # K x (d+1) one-vs-rest hyperplanes
    reg_c: float
    standardization: Standardization
    n_classes: int
    loss_history: tuple[tuple[float, ...], ...] = ()

    @property
    def d(self) -> int:
        return int(self.weights.shape[1]) - 1


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((y.shape[0], k))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def logistic_loss(weights: np.ndarray, xb: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean cross-entropy of the softmax head plus an L2 penalty (bias excluded)."""
    p = softmax(xb @ weights.T)
    n = xb.shape[0]
    nll = -np.log(np.maximum(p[np.arange(n), y], 1e-300)).mean()
    return float(nll + 0.5 * l2 * np.sum(weights[:, :-1] ** 2))


def logistic_grad(weights: np.ndarray, xb: np.ndarray, y: np.ndarray, l2: float) -> np.ndarray:
    p = softmax(xb @ weights.T)
    g = (p - _one_hot(y, weights.shape[0])).T @ xb / xb.shape[0]
    g[:, :-1] += l2 * weights[:, :-1]
    return g


def _check_trainable(dataset: Dataset):
    if dataset.n == 0:
        raise ValueError("empty dataset")
    if np.unique(dataset.y).size < 2:
        raise ValueError("single-class dataset")


def fit_logistic(dataset: Dataset, cfg: GdConfig | None = None) -> LogisticModel:
    """Full-batch gradient descent on L2-regularized multinomial cross-entropy.

    Steps that would raise the training loss are rejected and the learning
    rate halved, so the loss history never increases.
    """
    cfg = cfg or GdConfig(learning_rate=0.1, epochs=500, l2=1e-3)
    _check_trainable(dataset)
    k = dataset.schema.n_classes
    std = Standardization.fit(dataset.x)
    xb = add_bias(std.apply(dataset.x))
    w = np.zeros((k, xb.shape[1]))

    lr = cfg.learning_rate
    loss = logistic_loss(w, xb, dataset.y, cfg.l2)
    history = [loss]
    for _ in range(cfg.epochs):
        step = w - lr * logistic_grad(w, xb, dataset.y, cfg.l2)
        new_loss = logistic_loss(step, xb, dataset.y, cfg.l2)
        if new_loss > loss:
            lr *= 0.5
            history.append(loss)
            if lr < 1e-15:
                break
            continue
        w = step
        loss = new_loss
        history.append(loss)
    return LogisticModel(weights=w, standardization=std, n_classes=k, loss_history=tuple(history))


def _decide_logistic(probs: np.ndarray, n_classes: int):
    # For 2 classes the decision is the 0.5-threshold rule: label 1 when
    # p1 >= 0.5, which puts the exact tie on class 1.  Three or more classes
    # use argmax with the lowest-index tie-break.
    if n_classes == 2:
        if probs.ndim == 1:
            return int(probs[1] >= 0.5)
        return (probs[:, 1] >= 0.5).astype(np.int64)
    if probs.ndim == 1:
        return argmax_lowest(probs)
    return np.argmax(probs, axis=1).astype(np.int64)


def predict_logistic(model: LogisticModel, x) -> tuple[int, np.ndarray]:
    """Class label and calibrated probability vector for one feature vector."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"dimension mismatch: expected {model.d} features, got {x.shape}")
    z = np.append(model.standardization.apply(x), 1.0)
    probs = softmax(model.weights @ z)
    return _decide_logistic(probs, model.n_classes), probs


def predict_logistic_batch(model: LogisticModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xb = add_bias(model.standardization.apply(x))
    probs = softmax(xb @ model.weights.T)
    return _decide_logistic(probs, model.n_classes), probs


def hinge_loss(y: float, fx: float) -> float:
    """max(0, 1 - y*f(x)) for a sign label y in {-1, +1}."""
    if y not in (-1, 1):
        raise ValueError(f"sign label must be -1 or +1, got {y!r}")
    if not np.isfinite(fx):
        raise ValueError("score must be finite")
    return float(max(0.0, 1.0 - y * fx))


def _svm_objective(w: np.ndarray, xb: np.ndarray, t: np.ndarray, reg_c: float) -> float:
    margins = xb @ w
    hinge = np.maximum(0.0, 1.0 - t * margins).mean()
    return float(hinge + 0.5 * reg_c * np.sum(w[:-1] ** 2))


def _svm_subgrad(w: np.ndarray, xb: np.ndarray, t: np.ndarray, reg_c: float) -> np.ndarray:
    margins = xb @ w
    active = (t * margins) < 1.0
    g = -(xb * (t * active)[:, None]).mean(axis=0)
    g[:-1] += reg_c * w[:-1]
    return g


def fit_svm(dataset: Dataset, cfg: GdConfig | None = None, reg_c: float = 1.0) -> SvmModel:
    """One-vs-rest linear SVMs by subgradient descent on the hinge objective.

    Each class is trained independently (that class = +1, the rest = -1)
    with the same reject-and-halve step control as the logistic trainer.
    """
    cfg = cfg or GdConfig(learning_rate=0.01, epochs=500)
    if reg_c <= 0:
        raise ValueError("reg_c must be positive")
    _check_trainable(dataset)
    k = dataset.schema.n_classes
    std = Standardization.fit(dataset.x)
    xb = add_bias(std.apply(dataset.x))
    weights = np.zeros((k, xb.shape[1]))
    histories = []
    for c in range(k):
        t = np.where(dataset.y == c, 1.0, -1.0)
        w = np.zeros(xb.shape[1])
        lr = cfg.learning_rate
        loss = _svm_objective(w, xb, t, reg_c)
        history = [loss]
        for _ in range(cfg.epochs):
            step = w - lr * _svm_subgrad(w, xb, t, reg_c)
            new_loss = _svm_objective(step, xb, t, reg_c)
            if new_loss > loss:
                lr *= 0.5
                history.append(loss)
                if lr < 1e-15:
                    break
                continue
            w = step
            loss = new_loss
            history.append(loss)
        weights[c] = w
        histories.append(tuple(history))
    return SvmModel(
        weights=weights,
        reg_c=reg_c,
        standardization=std,
        n_classes=k,
        loss_history=tuple(histories),
    )


def svm_margins(model: SvmModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"dimension mismatch: expected {model.d} features, got {x.shape}")
    z = np.append(model.standardization.apply(x), 1.0)
    return model.weights @ z


def predict_svm(model: SvmModel, x) -> int:
    """Label of the largest one-vs-rest margin, ties to the lowest class."""
    return argmax_lowest(svm_margins(model, x))


def predict_svm_batch(model: SvmModel, x: np.ndarray) -> np.ndarray:
    xb = add_bias(model.standardization.apply(x))
    return np.argmax(xb @ model.weights.T, axis=1).astype(np.int64)
