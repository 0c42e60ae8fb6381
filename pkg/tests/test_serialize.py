import json

import numpy as np
import pytest

from mppkit.data import generate_synthetic
from mppkit.linear import GdConfig, fit_logistic, fit_svm, predict_logistic_batch, predict_svm_batch
from mppkit.mlp import fit_mlp, predict_mlp_batch
from mppkit.serialize import FORMAT_VERSION, from_document, load_model, save_model, to_document
from mppkit.trees import fit_gbdt, fit_tree, predict_gbdt_batch, predict_tree_batch


@pytest.fixture(scope="module")
def dataset():
    return generate_synthetic(80, 5, {0, 1}, seed=77, noise=0.05)


def roundtrip(model, schema, tmp_path, name):
    path = save_model(model, schema, tmp_path / f"{name}.json")
    return load_model(path, schema)


class TestRoundTrips:
    def test_logistic(self, dataset, tmp_path):
        model = fit_logistic(dataset)
        clone = roundtrip(model, dataset.schema, tmp_path, "logistic")
        assert np.array_equal(model.weights, clone.weights)
        a = predict_logistic_batch(model, dataset.x)
        b = predict_logistic_batch(clone, dataset.x)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])

    def test_svm(self, dataset, tmp_path):
        model = fit_svm(dataset)
        clone = roundtrip(model, dataset.schema, tmp_path, "svm")
        assert np.array_equal(model.weights, clone.weights)
        assert clone.reg_c == model.reg_c
        assert np.array_equal(
            predict_svm_batch(model, dataset.x), predict_svm_batch(clone, dataset.x)
        )

    def test_tree(self, dataset, tmp_path):
        model = fit_tree(dataset, max_depth=4)
        clone = roundtrip(model, dataset.schema, tmp_path, "tree")
        assert np.array_equal(
            predict_tree_batch(model, dataset.x), predict_tree_batch(clone, dataset.x)
        )
        assert clone.max_depth == 4

    def test_gbdt(self, dataset, tmp_path):
        model = fit_gbdt(dataset, rounds=12)
        clone = roundtrip(model, dataset.schema, tmp_path, "gbdt")
        a = predict_gbdt_batch(model, dataset.x)
        b = predict_gbdt_batch(clone, dataset.x)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])
        assert np.array_equal(model.importance_raw, clone.importance_raw)

    def test_mlp(self, dataset, tmp_path):
        model = fit_mlp(dataset, h=5, cfg=GdConfig(epochs=25, seed=2))
        clone = roundtrip(model, dataset.schema, tmp_path, "mlp")
        assert np.array_equal(model.w1, clone.w1)
        assert np.array_equal(model.w2, clone.w2)
        a = predict_mlp_batch(model, dataset.x)
        b = predict_mlp_batch(clone, dataset.x)
        assert np.array_equal(a[1], b[1])


class TestDocumentShape:
    def test_versioned_fields_present(self, dataset):
        doc = to_document(fit_tree(dataset, max_depth=2), dataset.schema)
        assert doc["format_version"] == FORMAT_VERSION
        assert doc["model_type"] == "tree"
        assert doc["schema_hash"] == dataset.schema.schema_hash()
        assert "weights" in doc and "hyperparameters" in doc

    def test_tree_nodes_nest_as_documented(self, dataset):
        doc = to_document(fit_tree(dataset, max_depth=2), dataset.schema)
        node = doc["weights"]["root"]
        if "leaf" not in node:
            assert set(node) == {"feature", "threshold", "left", "right"}
            assert isinstance(node["left"], dict)

    def test_document_is_json_clean(self, dataset):
        doc = to_document(fit_gbdt(dataset, rounds=3), dataset.schema)
        blob = json.dumps(doc)
        assert json.loads(blob) == doc

    def test_wrong_schema_rejected_on_load(self, dataset, tmp_path):
        model = fit_tree(dataset, max_depth=2)
        path = save_model(model, dataset.schema, tmp_path / "m.json")
        other = generate_synthetic(30, 4, {0}, seed=5).schema
        with pytest.raises(ValueError, match="different schema"):
            load_model(path, other)

    def test_unknown_version_rejected(self):
        with pytest.raises(ValueError, match="version"):
            from_document({"format_version": 99, "model_type": "tree"})

    def test_unknown_type_rejected(self):
        with pytest.raises(ValueError, match="model_type"):
            from_document({"format_version": FORMAT_VERSION, "model_type": "forest"})

    def test_unserializable_object_rejected(self, dataset):
        with pytest.raises(TypeError):
            to_document(object(), dataset.schema)
