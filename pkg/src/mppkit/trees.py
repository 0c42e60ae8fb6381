"""Decision tree, gradient-boosted trees, and split-gain feature importance.

The lone classification tree splits on Gini impurity decrease; the boosted
ensemble fits one regression tree per class per round to the softmax
log-loss residuals, with variance-reduction splits and the one-step
closed-form leaf update.  Candidate thresholds sit at midpoints between
consecutive distinct sorted values, and all tie-breaks are fixed (lowest
feature index, then lowest threshold) so fitted trees are stable across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureSchema
from .numeric import argmax_lowest, softmax


@dataclass
class TreeNode:
    """Internal node (feature, threshold, children) or leaf (value vector).

    Internal nodes route x[feature] <= threshold to the left child.  A leaf
    of the classification tree stores per-class training counts; a leaf of a
    boosted regression tree stores the single additive score.
    """

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None


@dataclass(frozen=True, eq=False)
class TreeModel:
    root: TreeNode
    max_depth: int
    min_samples_leaf: int
    d: int
    n_classes: int


@dataclass(frozen=True, eq=False)
class GbdtModel:
    rounds: int
    shrinkage: float
    trees: tuple[tuple[TreeNode, ...], ...]  # rounds x n_classes
    init_scores: np.ndarray
    importance_raw: np.ndarray
    d: int
    n_classes: int
    max_depth: int
    min_samples_leaf: int
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.trees) != self.rounds:
            raise ValueError("tree rounds do not match the declared round count")
        if any(len(group) != self.n_classes for group in self.trees):
            raise ValueError("each round must hold one tree per class")


@dataclass(frozen=True)
class ImportanceReport:
    """Features ranked by normalized split-gain importance."""

    entries: tuple[tuple[str, float], ...]
    total: float


def _route(node: TreeNode, x: np.ndarray) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.value


def tree_apply(root: TreeNode, x: np.ndarray) -> np.ndarray:
    """Leaf values for every row of x, routed in vectorized index batches."""
    x = np.asarray(x, dtype=float)
    probe = root
    while not probe.is_leaf:
        probe = probe.left
    out = np.empty((x.shape[0], probe.value.shape[0]))

    def rec(node: TreeNode, idx: np.ndarray):
        if node.is_leaf:
            out[idx] = node.value
            return
        mask = x[idx, node.feature] <= node.threshold
        rec(node.left, idx[mask])
        rec(node.right, idx[~mask])

    rec(root, np.arange(x.shape[0]))
    return out


def _best_gini_split(xs: np.ndarray, ys: np.ndarray, k: int, min_leaf: int):
    """Exhaustive best (feature, threshold) by Gini gain over midpoint candidates.

    Gain uses the weighted form Sl/nl + Sr/nr - Sp/np with S = sum of squared
    class counts, computed from integer counts so equal count-partitions give
    bit-identical gains and the fixed tie-breaks are meaningful.
    """
    m = xs.shape[0]
    counts = np.bincount(ys, minlength=k).astype(np.int64)
    parent_term = (counts * counts).sum() / m

    best = None  # (gain, feature, threshold)
    sizes = np.arange(1, m)
    for j in range(xs.shape[1]):
        order = np.argsort(xs[:, j], kind="stable")
        v = xs[order, j]
        onehot = np.zeros((m, k), dtype=np.int64)
        onehot[np.arange(m), ys[order]] = 1
        cum = np.cumsum(onehot, axis=0)
        ok = (v[1:] > v[:-1]) & (sizes >= min_leaf) & (m - sizes >= min_leaf)
        if not ok.any():
            continue
        cl = cum[:-1][ok]
        nl = sizes[ok]
        nr = m - nl
        cr = counts[None, :] - cl
        gains = (cl * cl).sum(axis=1) / nl + (cr * cr).sum(axis=1) / nr - parent_term
        i = int(np.argmax(gains))  # first max = lowest threshold
        if gains[i] > 0 and (best is None or gains[i] > best[0]):
            thresholds = (v[:-1][ok] + v[1:][ok]) / 2.0
            best = (float(gains[i]), j, float(thresholds[i]))
    return best


def fit_tree(dataset: Dataset, max_depth: int = 5, min_samples_leaf: int = 2) -> TreeModel:
    """Greedy recursive partitioning on Gini impurity decrease.

    Stops on purity, depth, or the per-leaf sample floor; a node with no
    strictly positive gain also becomes a leaf.
    """
    if dataset.n == 0:
        raise ValueError("empty dataset")
    if max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    if min_samples_leaf < 1:
        raise ValueError("min_samples_leaf must be at least 1")
    k = dataset.schema.n_classes
    x, y = dataset.x, dataset.y

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y[idx], minlength=k).astype(np.float64)
        if (
            depth >= max_depth
            or counts.max() == idx.size
            or idx.size < 2 * min_samples_leaf
        ):
            return TreeNode(value=counts)
        found = _best_gini_split(x[idx], y[idx], k, min_samples_leaf)
        if found is None:
            return TreeNode(value=counts)
        _, j, thr = found
        mask = x[idx, j] <= thr
        return TreeNode(
            feature=j,
            threshold=thr,
            left=build(idx[mask], depth + 1),
            right=build(idx[~mask], depth + 1),
        )

    root = build(np.arange(dataset.n), 0)
    return TreeModel(
        root=root,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        d=dataset.d,
        n_classes=k,
    )


def predict_tree(model: TreeModel, x) -> int:
    """Route to a leaf and return the majority class, ties to the lowest class."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"dimension mismatch: expected {model.d} features, got {x.shape}")
    return argmax_lowest(_route(model.root, x))


def predict_tree_batch(model: TreeModel, x: np.ndarray) -> np.ndarray:
    return np.argmax(tree_apply(model.root, x), axis=1).astype(np.int64)


def _fit_regression_tree(
    x: np.ndarray,
    targets: np.ndarray,
    max_depth: int,
    min_leaf: int,
    leaf_value,
    importance: np.ndarray,
):
    """Variance-reduction regression tree; returns (root, in-sample predictions).

    Split gains (sum-of-squares reduction) are accumulated per feature into
    `importance`.  Leaf payloads come from `leaf_value`, so the boosting loop
    can install its closed-form log-loss update.
    """
    out = np.empty(x.shape[0])

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        t = targets[idx]
        if depth >= max_depth or idx.size < 2 * min_leaf or t.max() == t.min():
            gamma = leaf_value(t)
            out[idx] = gamma
            return TreeNode(value=np.array([gamma]))

        m = idx.size
        total = t.sum()
        parent_term = total * total / m
        best = None
        sizes = np.arange(1, m)
        xs = x[idx]
        for j in range(x.shape[1]):
            order = np.argsort(xs[:, j], kind="stable")
            v = xs[order, j]
            csum = np.cumsum(t[order])[:-1]
            ok = (v[1:] > v[:-1]) & (sizes >= min_leaf) & (m - sizes >= min_leaf)
            if not ok.any():
                continue
            sl = csum[ok]
            nl = sizes[ok]
            gains = sl * sl / nl + (total - sl) ** 2 / (m - nl) - parent_term
            i = int(np.argmax(gains))
            if gains[i] > 0 and (best is None or gains[i] > best[0]):
                thresholds = (v[:-1][ok] + v[1:][ok]) / 2.0
                best = (float(gains[i]), j, float(thresholds[i]))

        if best is None:
            gamma = leaf_value(t)
            out[idx] = gamma
            return TreeNode(value=np.array([gamma]))
        gain, j, thr = best
        importance[j] += gain
        mask = xs[:, j] <= thr
        return TreeNode(
            feature=j,
            threshold=thr,
            left=build(idx[mask], depth + 1),
            right=build(idx[~mask], depth + 1),
        )

    root = build(np.arange(x.shape[0]), 0)
    return root, out


def _log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    p = softmax(scores)
    picked = p[np.arange(y.shape[0]), y]
    return float(-np.log(np.maximum(picked, 1e-300)).mean())


def fit_gbdt(
    dataset: Dataset,
    rounds: int = 200,
    shrinkage: float = 0.1,
    max_depth: int = 3,
    min_samples_leaf: int = 2,
) -> GbdtModel:
    """Multiclass gradient boosting with a softmax link and log-loss.

    Scores start at the class log-priors.  Each round computes the
    probabilities once, then fits one regression tree per class to the
    residuals 1{y=k} - p_k (the negative log-loss gradient); leaf values use
    the one-step update (K-1)/K * sum(r) / sum(|r|(1-|r|)), and scores move
    by shrinkage times the tree output.  Per-round training log-loss is
    recorded on the model.
    """
    if dataset.n == 0:
        raise ValueError("empty dataset")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if not 0.0 < shrinkage <= 1.0:
        raise ValueError("invalid shrinkage: must lie in (0, 1]")
    k = dataset.schema.n_classes
    n = dataset.n
    x, y = dataset.x, dataset.y

    counts = np.bincount(y, minlength=k).astype(np.float64)
    init = np.log(np.maximum(counts, 1e-12) / n)
    scores = np.tile(init, (n, 1))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0

    def newton_leaf(r: np.ndarray) -> float:
        denom = (np.abs(r) * (1.0 - np.abs(r))).sum()
        if denom < 1e-150:
            return 0.0
        return (k - 1) / k * r.sum() / denom

    importance = np.zeros(dataset.d)
    all_trees = []
    history = [_log_loss(scores, y)]
    for _ in range(rounds):
        residuals = onehot - softmax(scores)
        group = []
        step = np.empty((n, k))
        for c in range(k):
            root, pred = _fit_regression_tree(
                x, residuals[:, c], max_depth, min_samples_leaf, newton_leaf, importance
            )
            group.append(root)
            step[:, c] = pred
        scores += shrinkage * step
        all_trees.append(tuple(group))
        history.append(_log_loss(scores, y))

    return GbdtModel(
        rounds=rounds,
        shrinkage=shrinkage,
        trees=tuple(all_trees),
        init_scores=init,
        importance_raw=importance,
        d=dataset.d,
        n_classes=k,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        loss_history=tuple(history),
    )


def gbdt_scores(model: GbdtModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise ValueError(f"dimension mismatch: expected {model.d} features, got {x.shape}")
    scores = model.init_scores.astype(float).copy()
    for group in model.trees:
        for c, root in enumerate(group):
            scores[c] += model.shrinkage * _route(root, x)[0]
    return scores


def predict_gbdt(model: GbdtModel, x) -> tuple[int, np.ndarray]:
    """Label and probability vector from the accumulated ensemble scores."""
    probs = softmax(gbdt_scores(model, x))
    return argmax_lowest(probs), probs


def predict_gbdt_batch(model: GbdtModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    scores = np.tile(model.init_scores.astype(float), (x.shape[0], 1))
    for group in model.trees:
        for c, root in enumerate(group):
            scores[:, c] += model.shrinkage * tree_apply(root, x)[:, 0]
    probs = softmax(scores)
    return np.argmax(probs, axis=1).astype(np.int64), probs


def feature_importance(model: GbdtModel, schema: FeatureSchema) -> ImportanceReport:
    """Normalized split-gain importance, sorted descending by weight.

    When no tree ever split, every importance is zero and the reported sum
    is 0 rather than 1.
    """
    if schema.d != model.d:
        raise ValueError(
            f"schema has {schema.d} features but the model was fitted against {model.d}"
        )
    raw = model.importance_raw
    total = float(raw.sum())
    norm = raw / total if total > 0 else np.zeros_like(raw)
    order = np.argsort(-norm, kind="stable")  # ties keep schema order
    entries = tuple((schema.features[int(i)].name, float(norm[int(i)])) for i in order)
    return ImportanceReport(entries=entries, total=float(norm.sum()))
