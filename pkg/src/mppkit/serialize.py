"""Versioned JSON model documents.

Every fitted model serializes to a single JSON object::

    {"format_version": 1, "model_type": ..., "schema_hash": ...,
     "hyperparameters": {...}, "standardization": {...} | null,
     "weights": {...}}

Floats are written with Python's shortest round-trip representation, so a
reloaded model makes bit-identical decisions.  Tree nodes nest as
``{"feature": j, "threshold": t, "left": ..., "right": ...}`` with leaves
as ``{"leaf": [values]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .data import FeatureSchema
from .linear import LogisticModel, Standardization, SvmModel
from .mlp import MlpModel
from .trees import GbdtModel, TreeModel, TreeNode

FORMAT_VERSION = 1


def _node_to_obj(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf": [float(v) for v in node.value]}
    return {
        "feature": int(node.feature),
        "threshold": float(node.threshold),
        "left": _node_to_obj(node.left),
        "right": _node_to_obj(node.right),
    }


def _node_from_obj(obj: dict) -> TreeNode:
    if "leaf" in obj:
        return TreeNode(value=np.array(obj["leaf"], dtype=float))
    return TreeNode(
        feature=int(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=_node_from_obj(obj["left"]),
        right=_node_from_obj(obj["right"]),
    )


def _std_to_obj(std: Standardization | None):
    if std is None:
        return None
    return {"mean": [float(v) for v in std.mean], "std": [float(v) for v in std.std]}


def _std_from_obj(obj) -> Standardization | None:
    if obj is None:
        return None
    return Standardization(
        mean=np.array(obj["mean"], dtype=float), std=np.array(obj["std"], dtype=float)
    )


def _matrix(w: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in w]


def to_document(model, schema: FeatureSchema) -> dict:
    """Build the JSON-ready document for any of the five model types."""
    doc = {"format_version": FORMAT_VERSION, "schema_hash": schema.schema_hash()}
    if isinstance(model, LogisticModel):
        doc.update(
            model_type="logistic",
            hyperparameters={"n_classes": model.n_classes},
            standardization=_std_to_obj(model.standardization),
            weights={"coef": _matrix(model.weights)},
        )
    elif isinstance(model, SvmModel):
        doc.update(
            model_type="svm",
            hyperparameters={"n_classes": model.n_classes, "reg_c": float(model.reg_c)},
            standardization=_std_to_obj(model.standardization),
            weights={"coef": _matrix(model.weights)},
        )
    elif isinstance(model, TreeModel):
        doc.update(
            model_type="tree",
            hyperparameters={
                "n_classes": model.n_classes,
                "max_depth": model.max_depth,
                "min_samples_leaf": model.min_samples_leaf,
                "d": model.d,
            },
            standardization=None,
            weights={"root": _node_to_obj(model.root)},
        )
    elif isinstance(model, GbdtModel):
        doc.update(
            model_type="gbdt",
            hyperparameters={
                "n_classes": model.n_classes,
                "rounds": model.rounds,
                "shrinkage": float(model.shrinkage),
                "max_depth": model.max_depth,
                "min_samples_leaf": model.min_samples_leaf,
                "d": model.d,
            },
            standardization=None,
            weights={
                "init_scores": [float(v) for v in model.init_scores],
                "importance_raw": [float(v) for v in model.importance_raw],
                "trees": [[_node_to_obj(root) for root in group] for group in model.trees],
            },
        )
    elif isinstance(model, MlpModel):
        doc.update(
            model_type="mlp",
            hyperparameters={
                "n_classes": model.n_classes,
                "hidden": model.h,
                "activation": model.activation,
            },
            standardization=_std_to_obj(model.standardization),
            weights={"w1": _matrix(model.w1), "w2": _matrix(model.w2)},
        )
    else:
        raise TypeError(f"cannot serialize object of type {type(model).__name__}")
    return doc


def from_document(doc: dict):
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model document version {version!r}")
    kind = doc.get("model_type")
    hp = doc.get("hyperparameters", {})
    weights = doc.get("weights", {})
    if kind == "logistic":
        return LogisticModel(
            weights=np.array(weights["coef"], dtype=float),
            standardization=_std_from_obj(doc["standardization"]),
            n_classes=int(hp["n_classes"]),
        )
    if kind == "svm":
        return SvmModel(
            weights=np.array(weights["coef"], dtype=float),
            reg_c=float(hp["reg_c"]),
            standardization=_std_from_obj(doc["standardization"]),
            n_classes=int(hp["n_classes"]),
        )
    if kind == "tree":
        return TreeModel(
            root=_node_from_obj(weights["root"]),
            max_depth=int(hp["max_depth"]),
            min_samples_leaf=int(hp["min_samples_leaf"]),
            d=int(hp["d"]),
            n_classes=int(hp["n_classes"]),
        )
    if kind == "gbdt":
        groups = tuple(
            tuple(_node_from_obj(obj) for obj in group) for group in weights["trees"]
        )
        return GbdtModel(
            rounds=int(hp["rounds"]),
            shrinkage=float(hp["shrinkage"]),
            trees=groups,
            init_scores=np.array(weights["init_scores"], dtype=float),
            importance_raw=np.array(weights["importance_raw"], dtype=float),
            d=int(hp["d"]),
            n_classes=int(hp["n_classes"]),
            max_depth=int(hp["max_depth"]),
            min_samples_leaf=int(hp["min_samples_leaf"]),
        )
    if kind == "mlp":
        return MlpModel(
            w1=np.array(weights["w1"], dtype=float),
            w2=np.array(weights["w2"], dtype=float),
            standardization=_std_from_obj(doc["standardization"]),
            h=int(hp["hidden"]),
            n_classes=int(hp["n_classes"]),
            activation=hp.get("activation", "tanh"),
        )
    raise ValueError(f"unknown model_type {kind!r}")


def save_model(model, schema: FeatureSchema, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_document(model, schema), indent=2, sort_keys=True) + "\n")
    return path


def load_model(path, schema: FeatureSchema | None = None):
    """Load a model document; if a schema is given, its hash must match."""
    doc = json.loads(Path(path).read_text())
    if schema is not None and doc.get("schema_hash") != schema.schema_hash():
        raise ValueError("model document was fitted against a different schema")
    return from_document(doc)
