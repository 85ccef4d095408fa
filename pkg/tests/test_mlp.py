"""MLP architecture arithmetic, gradient checks, training behavior."""

from __future__ import annotations

import numpy as np
import pytest

from newsfilter.errors import InvariantError
from newsfilter.models.mlp import (
    MlpModel,
    _init_params,
    finite_difference_check,
    parameter_count,
    train_mlp,
)


def _fresh_model(d, hidden, seed=0):
    params = _init_params(d, hidden, np.random.default_rng(seed))
    return MlpModel(params=params, running_mean=np.zeros(d),
                    running_var=np.ones(d), hidden=hidden)


class TestArchitecture:
    def test_parameter_count_35_20_2(self):
        model = _fresh_model(35, 20)
        # 70 batch-norm affine + 720 hidden dense + 42 output = 832
        assert parameter_count(model) == 832

    def test_parameter_count_27_128_2(self):
        model = _fresh_model(27, 128)
        assert parameter_count(model) == 2 * 27 + (27 * 128 + 128) + (128 * 2 + 2)

    def test_probabilities_sum_to_one(self):
        model = _fresh_model(5, 8)
        data = np.random.default_rng(1).standard_normal((10, 5))
        p1 = model.predict_proba(data)
        assert np.all((p1 >= 0) & (p1 <= 1))


class TestGradients:
    def test_finite_differences_random_batch(self):
        rng = np.random.default_rng(3)
        model = _fresh_model(5, 8, seed=3)
        batch = rng.standard_normal((4, 5))
        labels = np.array([0, 1, 1, 0], dtype=np.int64)
        assert finite_difference_check(model, batch, labels) < 1e-4

    def test_zero_input_batch_stays_finite(self):
        model = _fresh_model(4, 6, seed=4)
        batch = np.zeros((3, 4))
        labels = np.array([0, 1, 0], dtype=np.int64)
        error = finite_difference_check(model, batch, labels)
        assert np.isfinite(error)

    def test_larger_batch_and_width(self):
        rng = np.random.default_rng(5)
        model = _fresh_model(7, 12, seed=5)
        batch = rng.standard_normal((9, 7)) * 3
        labels = (rng.random(9) < 0.5).astype(np.int64)
        assert finite_difference_check(model, batch, labels) < 1e-4

    def test_single_row_batch_rejected(self):
        model = _fresh_model(3, 4)
        with pytest.raises(InvariantError):
            finite_difference_check(model, np.zeros((1, 3)),
                                    np.array([0], dtype=np.int64))


class TestTraining:
    def test_learns_separable_blobs(self):
        rng = np.random.default_rng(6)
        n = 240
        y = np.array([0, 1] * (n // 2), dtype=np.int64)
        data = rng.standard_normal((n, 6))
        data[:, 0] += y * 3.0
        data[:, 3] -= y * 2.0
        model = train_mlp(data, y, hidden=8, rounds=2, epochs=50, seed=0)
        predictions = (model.predict_proba(data) >= 0.5).astype(int)
        assert (predictions == y).mean() > 0.95

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(7)
        data = rng.standard_normal((90, 4))
        y = (data[:, 1] > 0).astype(np.int64)
        a = train_mlp(data, y, hidden=5, rounds=2, epochs=5, seed=9)
        b = train_mlp(data, y, hidden=5, rounds=2, epochs=5, seed=9)
        probe = rng.standard_normal((15, 4))
        assert np.array_equal(a.predict_proba(probe), b.predict_proba(probe))

    def test_inference_is_dropout_free_and_row_order_invariant(self):
        rng = np.random.default_rng(8)
        data = rng.standard_normal((60, 4))
        y = (data[:, 0] > 0).astype(np.int64)
        model = train_mlp(data, y, hidden=5, rounds=1, epochs=5, seed=2)
        probe = rng.standard_normal((20, 4))
        assert np.array_equal(model.predict_proba(probe), model.predict_proba(probe))
        perm = rng.permutation(20)
        assert np.allclose(model.predict_proba(probe)[perm],
                           model.predict_proba(probe[perm]), atol=1e-12)

    def test_best_validation_round_is_kept(self):
        rng = np.random.default_rng(9)
        data = rng.standard_normal((120, 5))
        y = (data[:, 2] > 0).astype(np.int64)
        model = train_mlp(data[:80], y[:80], data[80:], y[80:],
                          hidden=6, rounds=3, epochs=8, seed=4)
        stats = model.training_summary["rounds"]
        assert len(stats) == 3
        best_acc = max(s["val_accuracy"] for s in stats)
        val_scores = model.predict_proba(data[80:])
        kept_acc = ((val_scores >= 0.5).astype(int) == y[80:]).mean()
        assert kept_acc == pytest.approx(best_acc)

    def test_mean_round_metrics_recorded(self):
        rng = np.random.default_rng(10)
        data = rng.standard_normal((60, 3))
        y = (data[:, 0] > 0).astype(np.int64)
        model = train_mlp(data, y, hidden=4, rounds=2, epochs=4, seed=1)
        summary = model.training_summary
        assert "mean_train_accuracy" in summary
        assert "mean_train_loss" in summary
        expected = np.mean([s["train_accuracy"] for s in summary["rounds"]])
        assert summary["mean_train_accuracy"] == pytest.approx(expected)
