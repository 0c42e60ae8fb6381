import numpy as np
import pytest

from conftest import make_dataset
from mppkit.data import generate_synthetic
from mppkit.linear import (
    GdConfig,
    LogisticModel,
    Standardization,
    add_bias,
    fit_logistic,
    fit_svm,
    hinge_loss,
    logistic_grad,
    logistic_loss,
    predict_logistic,
    predict_logistic_batch,
    predict_svm,
    predict_svm_batch,
    svm_margins,
)
from mppkit.linear import SvmModel
from mppkit.numeric import SeededRng, finite_difference_gradient


def two_class_toy():
    x = np.array([[-1.0]] * 20 + [[1.0]] * 20)
    y = np.array([0] * 20 + [1] * 20)
    return make_dataset(x, y, n_classes=2)


class TestGdConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            GdConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            GdConfig(epochs=0)
        with pytest.raises(ValueError):
            GdConfig(l2=-1.0)


class TestFitLogistic:
    def test_separable_toy_reaches_perfect_accuracy(self):
        ds = two_class_toy()
        model = fit_logistic(ds)
        labels, _ = predict_logistic_batch(model, ds.x)
        assert np.mean(labels == ds.y) == 1.0

    def test_single_class_rejected(self):
        ds = make_dataset(np.ones((5, 2)), np.zeros(5, dtype=int))
        with pytest.raises(ValueError, match="single-class"):
            fit_logistic(ds)

    def test_empty_rejected(self):
        ds = make_dataset(np.empty((0, 2)), np.empty(0, dtype=int))
        with pytest.raises(ValueError, match="empty"):
            fit_logistic(ds)

    def test_loss_history_non_increasing_at_default_rate(self):
        ds = generate_synthetic(150, 5, {0, 1}, seed=21, noise=0.1)
        model = fit_logistic(ds)
        diffs = np.diff(np.array(model.loss_history))
        assert np.all(diffs <= 0)

    def test_deterministic(self):
        ds = generate_synthetic(80, 4, {0}, seed=3)
        a = fit_logistic(ds)
        b = fit_logistic(ds)
        assert np.array_equal(a.weights, b.weights)

    def test_analytic_gradient_matches_oracle(self):
        rng = SeededRng(42)
        for trial in range(20):
            n = 5 + int(rng.integers(0, 46))
            d = 1 + int(rng.integers(0, 10))
            x = np.asarray(rng.random((n, d))) * 4 - 2
            y = rng.integers(0, 3, n)
            w = np.asarray(rng.normal((3, d + 1)))
            xb = add_bias(x)
            analytic = logistic_grad(w, xb, y, 1e-3)
            oracle = finite_difference_gradient(
                lambda v: logistic_loss(v, xb, y, 1e-3), w, h=1e-6
            )
            rel = np.linalg.norm(analytic - oracle) / max(np.linalg.norm(oracle), 1e-12)
            assert rel < 1e-4, f"trial {trial}: rel error {rel}"


class TestPredictLogistic:
    def test_binary_tie_goes_to_class_one(self):
        # all-zero weights give p1 = 0.5 exactly; Eq-style rule labels it 1
        std = Standardization(mean=np.zeros(2), std=np.ones(2))
        model = LogisticModel(weights=np.zeros((2, 3)), standardization=std, n_classes=2)
        label, probs = predict_logistic(model, np.array([0.3, -0.7]))
        assert probs[1] == 0.5
        assert label == 1

    def test_binary_rule_matches_threshold_everywhere(self):
        rng = SeededRng(7)
        std = Standardization(mean=np.zeros(1), std=np.ones(1))
        model = LogisticModel(
            weights=np.asarray(rng.normal((2, 2))), standardization=std, n_classes=2
        )
        for _ in range(300):
            x = np.asarray([rng.random() * 6 - 3])
            label, probs = predict_logistic(model, x)
            assert label == (1 if probs[1] >= 0.5 else 0)

    def test_all_zero_weights_three_class(self):
        std = Standardization(mean=np.zeros(2), std=np.ones(2))
        model = LogisticModel(weights=np.zeros((3, 3)), standardization=std, n_classes=3)
        label, probs = predict_logistic(model, np.array([1.0, 2.0]))
        assert np.allclose(probs, [1 / 3] * 3, atol=1e-15)
        assert label == 0

    def test_dominant_class_two(self):
        std = Standardization(mean=np.zeros(1), std=np.ones(1))
        w = np.zeros((3, 2))
        w[2, 1] = 10.0  # bias pushes class 2 up by +10
        model = LogisticModel(weights=w, standardization=std, n_classes=3)
        label, probs = predict_logistic(model, np.array([0.0]))
        assert label == 2
        assert probs[2] > 0.99

    def test_dimension_mismatch(self):
        ds = two_class_toy()
        model = fit_logistic(ds)
        with pytest.raises(ValueError, match="dimension"):
            predict_logistic(model, np.array([1.0, 2.0]))

    def test_standardization_uses_fit_time_stats_only(self):
        ds = generate_synthetic(90, 4, {0}, seed=12)
        model = fit_logistic(ds)
        before = predict_logistic_batch(model, ds.x)
        # build and fit an unrelated dataset with shuffled columns; the
        # first model must be unaffected
        other = generate_synthetic(90, 4, {1}, seed=99)
        fit_logistic(other)
        after = predict_logistic_batch(model, ds.x)
        assert np.array_equal(before[0], after[0])
        assert np.array_equal(before[1], after[1])


class TestHingeLoss:
    def test_margin_satisfied(self):
        assert hinge_loss(1, 2.0) == 0.0

    def test_on_boundary_score_zero(self):
        assert hinge_loss(1, 0.0) == 1.0

    def test_negative_label_positive_score(self):
        assert hinge_loss(-1, 0.5) == 1.5

    def test_invalid_label(self):
        with pytest.raises(ValueError):
            hinge_loss(0, 1.0)

    def test_non_negative_and_zero_region(self):
        rng = SeededRng(33)
        for _ in range(500):
            y = 1 if rng.random() < 0.5 else -1
            fx = rng.random() * 8 - 4
            loss = hinge_loss(y, fx)
            assert loss >= 0.0
            assert (loss == 0.0) == (y * fx >= 1.0)


class TestFitSvm:
    def test_separable_toy(self):
        ds = two_class_toy()
        model = fit_svm(ds, GdConfig(learning_rate=0.2, epochs=500))
        labels = predict_svm_batch(model, ds.x)
        assert np.mean(labels == ds.y) == 1.0
        zb = add_bias(model.standardization.apply(ds.x))
        margins = zb @ model.weights.T
        for c in range(2):
            t = np.where(ds.y == c, 1.0, -1.0)
            assert np.maximum(0.0, 1.0 - t * margins[:, c]).mean() < 1e-3

    def test_heavier_regularization_shrinks_weights(self):
        ds = generate_synthetic(200, 5, {0, 1}, seed=3)
        norms = [
            float(np.linalg.norm(fit_svm(ds, reg_c=rc).weights[:, :-1]))
            for rc in (0.5, 5.0, 50.0)
        ]
        assert norms[0] > norms[1] > norms[2]

    def test_deterministic(self):
        ds = generate_synthetic(60, 3, {0}, seed=8)
        assert np.array_equal(fit_svm(ds).weights, fit_svm(ds).weights)

    def test_invalid_reg_c(self):
        with pytest.raises(ValueError):
            fit_svm(two_class_toy(), reg_c=0.0)

    def test_single_class_rejected(self):
        ds = make_dataset(np.ones((5, 1)), np.ones(5, dtype=int))
        with pytest.raises(ValueError, match="single-class"):
            fit_svm(ds)


class TestPredictSvm:
    def _margin_model(self, margins):
        # bias-only weights reproduce any fixed margin vector at x = 0
        w = np.zeros((3, 2))
        w[:, 1] = margins
        std = Standardization(mean=np.zeros(1), std=np.ones(1))
        return SvmModel(weights=w, reg_c=1.0, standardization=std, n_classes=3)

    def test_largest_margin_wins(self):
        model = self._margin_model([0.2, 0.9, -1.0])
        assert predict_svm(model, np.array([0.0])) == 1

    def test_all_equal_margins_tie_to_zero(self):
        model = self._margin_model([0.4, 0.4, 0.4])
        assert predict_svm(model, np.array([0.0])) == 0

    def test_uniform_positive_scaling_keeps_label(self):
        rng = SeededRng(10)
        for _ in range(50):
            margins = np.asarray(rng.normal(3))
            model = self._margin_model(margins)
            scaled = self._margin_model(margins * 7.5)
            x = np.array([0.0])
            assert predict_svm(model, x) == predict_svm(scaled, x)

    def test_dimension_mismatch(self):
        model = self._margin_model([0.0, 0.0, 0.0])
        with pytest.raises(ValueError, match="dimension"):
            svm_margins(model, np.array([1.0, 2.0]))
