import math
import warnings

import numpy as np
import pytest

from sahs.errors import DimensionMismatch, EmptyTrainingSet, ModelFormatError
from sahs.mlp import (DEFAULT_HIDDEN, Gradients, MlpConfig, MlpModel, backprop, cross_entropy, forward,
                      rmsprop_step, softmax, train)


def small_model(seed=0, hidden=(8, 4), d=5, k=3):
    return MlpModel.initialize(MlpConfig(input_dim=d, hidden_sizes=hidden, num_classes=k, seed=seed))


def numeric_gradients(model, x, y, h=1e-6):
    """Central differences of the batch-mean cross-entropy, parameter by parameter."""
    out = []
    for p in model.weights + model.biases:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            up = cross_entropy(forward(model, x), y)
            p[idx] = old - h
            down = cross_entropy(forward(model, x), y)
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def max_relative_error(model, x, y):
    grads = backprop(model, x, y)
    worst = 0.0
    for a, b in zip(grads.weights + grads.biases, numeric_gradients(model, x, y)):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst


def test_default_architecture():
    cfg = MlpConfig()
    assert DEFAULT_HIDDEN == (1024, 512, 256, 128, 64, 32, 16, 8, 4)
    assert cfg.layer_sizes == (17, *DEFAULT_HIDDEN, 2)
    assert (cfg.learning_rate, cfg.rms_decay, cfg.epsilon, cfg.batch_size, cfg.max_epochs) == (
        1e-3, 0.9, 1e-8, 32, 200)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_backprop_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    model = small_model(seed)
    x = rng.normal(size=(6, 5))
    y = np.eye(3)[rng.integers(0, 3, 6)]
    assert max_relative_error(model, x, y) < 1e-4


def test_hand_forward_pass():
    cfg = MlpConfig(input_dim=2, hidden_sizes=(2,), num_classes=2)
    m = MlpModel.initialize(cfg)
    m.weights = [np.array([[1.0, -1.0], [0.5, 2.0]]), np.array([[1.0, 0.0], [0.0, 1.0]])]
    m.biases = [np.array([0.0, 0.5]), np.array([0.1, -0.1])]
    x = np.array([1.0, 2.0])
    h = [math.tanh(1 * 1 + 2 * 0.5 + 0.0), math.tanh(-1 + 4 + 0.5)]
    logits = [h[0] + 0.1, h[1] - 0.1]
    e = [math.exp(v) for v in logits]
    np.testing.assert_allclose(forward(m, x), [e[0] / sum(e), e[1] / sum(e)], atol=1e-15)


def test_softmax_normalized_and_stable():
    rng = np.random.default_rng(4)
    p = softmax(rng.normal(scale=50, size=(1000, 4)))
    assert np.all(np.abs(p.sum(axis=1) - 1) < 1e-9) and np.all(p >= 0)
    assert np.all(np.isfinite(softmax(np.array([[1e4, -1e4]]))))


def test_rmsprop_first_step_by_hand():
    m = small_model(d=2, hidden=(2,), k=2)
    before = [w.copy() for w in m.weights]
    grads = Gradients([np.ones_like(w) for w in m.weights], [np.zeros_like(b) for b in m.biases])
    rmsprop_step(m, grads)
    step = 1e-3 / (math.sqrt(0.1) + 1e-8)
    for w0, w1 in zip(before, m.weights):
        np.testing.assert_allclose(w0 - w1, step, rtol=1e-12)
    np.testing.assert_allclose(m.acc_weights[0], 0.1)


def test_standardize_rejects_wrong_width():
    with pytest.raises(DimensionMismatch):
        forward(small_model(), np.zeros(4))


def _blobs(rng, n, d=4, gap=4.0):
    y = rng.integers(0, 2, n)
    x = rng.normal(size=(n, d)) + gap * y[:, None]
    return x, y


def test_training_separates_blobs_and_is_deterministic():
    rng = np.random.default_rng(0)
    tr, va, te = _blobs(rng, 120), _blobs(rng, 40), _blobs(rng, 100)
    cfg = MlpConfig(input_dim=4, hidden_sizes=(16, 8), max_epochs=30, seed=3)
    m1, t1 = train(cfg, tr, va)
    m2, t2 = train(cfg, tr, va)
    assert np.mean(m1.predict(te[0]) == te[1]) >= 0.95
    assert t1.train_loss == t2.train_loss and t1.best_epoch == t2.best_epoch
    for a, b in zip(m1.weights, m2.weights):
        np.testing.assert_array_equal(a, b)
    assert t1.val_accuracy[t1.best_epoch] == max(t1.val_accuracy)
    assert t1.best_epoch == t1.val_accuracy.index(max(t1.val_accuracy))


def test_constant_features_predict_majority_rate():
    rng = np.random.default_rng(1)
    y = (rng.random(100) < 0.7).astype(int)
    x = np.ones((100, 3))
    m, _ = train(MlpConfig(input_dim=3, hidden_sizes=(8,), max_epochs=40), (x, y), (x, y))
    assert np.all(m.predict(x) == 1)
    assert np.mean(m.predict(x) == y) == pytest.approx(np.mean(y))


def test_degenerate_training_sets():
    cfg = MlpConfig(input_dim=2, hidden_sizes=(4,), max_epochs=2)
    with pytest.raises(EmptyTrainingSet):
        train(cfg, (np.zeros((0, 2)), np.zeros(0, int)), (np.zeros((1, 2)), [0]))
    with pytest.warns(RuntimeWarning):
        train(cfg, (np.zeros((4, 2)), [1, 1, 1, 1]), (np.zeros((1, 2)), [1]))


def test_save_load_round_trip(tmp_path):
    m = small_model(seed=9)
    m.feature_mean = np.arange(5.0)
    path = tmp_path / "m.npz"
    m.save(path)
    back = MlpModel.load(path)
    x = np.random.default_rng(0).normal(size=(7, 5))
    np.testing.assert_array_equal(forward(back, x), forward(m, x))
    assert back.config == m.config


def test_load_rejects_other_model_kinds(tmp_path):
    from sahs.svm import fit_svm
    path = tmp_path / "s.npz"
    fit_svm(np.array([[0.0], [1.0], [2.0], [3.0]]), [0, 0, 1, 1], epochs=2).save(path)
    with pytest.raises(ModelFormatError):
        MlpModel.load(path)
