"""Three-class evaluation: confusion matrix, one-vs-rest metrics, CV driver.

The confusion matrix convention is rows = actual class, columns = predicted
class.  Per-class precision/recall/F1 come from collapsing the other two
classes into an opposite class; zero-denominator metrics are reported as 0
with an explicit undefined flag so report shapes stay fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, stratified_kfold
from .linear import GdConfig, fit_logistic, fit_svm, predict_logistic_batch, predict_svm_batch
from .mlp import fit_mlp, predict_mlp_batch
from .numeric import derive_seed
from .trees import fit_gbdt, fit_tree, predict_gbdt_batch, predict_tree_batch

N_CLASSES = 3


class CrossValidationError(RuntimeError):
    """A fold's fit or predict failed; the message names the fold."""


def confusion_matrix(truths, preds) -> np.ndarray:
    """counts[a][p] = number of samples with actual class a predicted as p."""
    t = np.asarray(truths)
    p = np.asarray(preds)
    if t.shape != p.shape or t.ndim != 1 or t.size == 0:
        raise ValueError("truths and preds must be equal-length non-empty 1-D sequences")
    ti = t.astype(np.int64)
    pi = p.astype(np.int64)
    if np.any(ti != t) or np.any(pi != p):
        raise ValueError("labels must be integers")
    for name, arr in (("truths", ti), ("preds", pi)):
        if arr.min() < 0 or arr.max() >= N_CLASSES:
            raise ValueError(f"{name} contain a label outside 0..{N_CLASSES - 1}")
    m = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(m, (ti, pi), 1)
    return m


@dataclass(frozen=True)
class ClassMetrics:
    class_id: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    precision_defined: bool
    recall_defined: bool
    f1_defined: bool


def per_class_metrics(m: np.ndarray, c: int) -> ClassMetrics:
    """One-vs-rest counts and metrics for class c (the other classes merged)."""
    m = np.asarray(m)
    if m.shape != (N_CLASSES, N_CLASSES):
        raise ValueError("expected a 3x3 confusion matrix")
    if not 0 <= c < N_CLASSES:
        raise ValueError(f"invalid class id {c}")
    total = int(m.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")
    tp = int(m[c, c])
    fp = int(m[:, c].sum()) - tp
    fn = int(m[c, :].sum()) - tp
    tn = total - tp - fp - fn

    precision_defined = (tp + fp) > 0
    recall_defined = (tp + fn) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if recall_defined else 0.0
    f1_defined = precision_defined and recall_defined and (precision + recall) > 0
    f1 = 2 * precision * recall / (precision + recall) if f1_defined else 0.0
    return ClassMetrics(
        class_id=c,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        precision=precision,
        recall=recall,
        f1=f1,
        precision_defined=precision_defined,
        recall_defined=recall_defined,
        f1_defined=f1_defined,
    )


def overall_accuracy(m: np.ndarray) -> float:
    m = np.asarray(m)
    total = int(m.sum())
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(m) / total)


@dataclass(frozen=True)
class ModelSpec:
    """Model identifier plus hyperparameter overrides for the CV driver."""

    name: str
    params: dict = field(default_factory=dict)


MODEL_DEFAULTS: dict[str, dict] = {
    "logistic": {"learning_rate": 0.1, "epochs": 500, "l2": 1e-3},
    "svm": {"learning_rate": 0.01, "epochs": 500, "reg_c": 1.0},
    "tree": {"max_depth": 5, "min_samples_leaf": 2},
    "gbdt": {"rounds": 200, "shrinkage": 0.1, "max_depth": 3, "min_samples_leaf": 2},
    "mlp": {"hidden": 16, "learning_rate": 0.1, "epochs": 500, "l2": 1e-4, "batch_size": 32},
}

MODEL_NAMES = tuple(MODEL_DEFAULTS)


def resolve_params(name: str, overrides: dict | None = None) -> dict:
    if name not in MODEL_DEFAULTS:
        raise ValueError(f"unknown model name {name!r}; expected one of {list(MODEL_NAMES)}")
    params = dict(MODEL_DEFAULTS[name])
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ValueError(f"unknown hyperparameter {key!r} for model {name!r}")
        params[key] = value
    return params


def fit_predictor(name: str, params: dict, dataset: Dataset, seed: int):
    """Fit one model and return a batch label-prediction callable."""
    if name == "logistic":
        model = fit_logistic(
            dataset,
            GdConfig(params["learning_rate"], params["epochs"], params["l2"], seed),
        )
        return lambda x: predict_logistic_batch(model, x)[0]
    if name == "svm":
        model = fit_svm(
            dataset,
            GdConfig(params["learning_rate"], params["epochs"], 0.0, seed),
            reg_c=params["reg_c"],
        )
        return lambda x: predict_svm_batch(model, x)
    if name == "tree":
        model = fit_tree(dataset, params["max_depth"], params["min_samples_leaf"])
        return lambda x: predict_tree_batch(model, x)
    if name == "gbdt":
        model = fit_gbdt(
            dataset,
            params["rounds"],
            params["shrinkage"],
            params["max_depth"],
            params["min_samples_leaf"],
        )
        return lambda x: predict_gbdt_batch(model, x)[0]
    if name == "mlp":
        model = fit_mlp(
            dataset,
            h=params["hidden"],
            cfg=GdConfig(params["learning_rate"], params["epochs"], params["l2"], seed),
            batch_size=params["batch_size"],
        )
        return lambda x: predict_mlp_batch(model, x)[0]
    raise ValueError(f"unknown model name {name!r}; expected one of {list(MODEL_NAMES)}")


@dataclass(frozen=True, eq=False)
class CvReport:
    """Pooled out-of-fold results for one model."""

    model: str
    params: dict
    matrix: np.ndarray
    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    fold_accuracies: tuple[float, ...]
    fold_accuracy_mean: float
    fold_accuracy_std: float
    seed: int
    k: int
    fold_plan_digest: str


def cross_validate(spec: ModelSpec, dataset: Dataset, k: int = 5, seed: int = 0) -> CvReport:
    """Stratified k-fold CV: fit on k-1 folds, predict the held-out fold,
    pool every out-of-fold prediction into a single confusion matrix.

    Each fold trains with its own derived seed, so folds could run in any
    order (or concurrently) and produce the same report.
    """
    if dataset.schema.n_classes != N_CLASSES:
        raise ValueError("cross_validate expects a 3-class dataset")
    params = resolve_params(spec.name, spec.params)
    plan = stratified_kfold(dataset, k, seed)

    preds = np.full(dataset.n, -1, dtype=np.int64)
    fold_accs = []
    everything = np.arange(dataset.n)
    for f, fold in enumerate(plan.folds):
        test_idx = np.asarray(fold, dtype=np.int64)
        train_idx = np.setdiff1d(everything, test_idx)
        try:
            predictor = fit_predictor(
                spec.name, params, dataset.subset(train_idx), derive_seed(seed, f)
            )
            fold_preds = np.asarray(predictor(dataset.x[test_idx]), dtype=np.int64)
        except Exception as exc:
            raise CrossValidationError(f"fold {f}: {exc}") from exc
        preds[test_idx] = fold_preds
        fold_accs.append(float(np.mean(fold_preds == dataset.y[test_idx])))

    matrix = confusion_matrix(dataset.y, preds)
    return CvReport(
        model=spec.name,
        params=params,
        matrix=matrix,
        per_class=tuple(per_class_metrics(matrix, c) for c in range(N_CLASSES)),
        accuracy=overall_accuracy(matrix),
        fold_accuracies=tuple(fold_accs),
        fold_accuracy_mean=float(np.mean(fold_accs)),
        fold_accuracy_std=float(np.std(fold_accs)),
        seed=int(seed),
        k=int(k),
        fold_plan_digest=plan.digest(),
    )
