import cvxpy as cp
import numpy as np
import pytest

from sahs.errors import SingleClassTrainingSet
from sahs.svm import LinearSvmModel, balanced_class_weights, fit_svm, hinge_objective


def qp_optimum(z, y_pm, sw, C):
    w = cp.Variable(z.shape[1])
    b = cp.Variable()
    obj = 0.5 * cp.sum_squares(w) + C * cp.sum(cp.multiply(sw, cp.pos(1 - cp.multiply(y_pm, z @ w + b))))
    prob = cp.Problem(cp.Minimize(obj))
    prob.solve()
    return prob.value


def _overlapping(rng, n=150, d=4):
    y = (rng.random(n) < 0.35).astype(int)
    x = rng.normal(size=(n, d)) + 1.2 * y[:, None]
    return x, y


@pytest.mark.parametrize("seed,C", [(0, 1.0), (1, 0.1), (2, 10.0)])
def test_objective_within_one_percent_of_qp(seed, C):
    rng = np.random.default_rng(seed)
    x, y = _overlapping(rng)
    m = fit_svm(x, y, C=C, seed=seed, epochs=200)
    z = m.standardize(x)
    y_pm = np.where(y == 1, 1.0, -1.0)
    sw = balanced_class_weights(y, np.array([0, 1]))[y]
    ours = hinge_objective(m.weights[0], m.bias[0], z, y_pm, sw, C)
    assert ours <= qp_optimum(z, y_pm, sw, C) * 1.01


def test_trace_is_monotone():
    x, y = _overlapping(np.random.default_rng(3))
    trace = fit_svm(x, y, epochs=50).objective_trace[0]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_balanced_weights():
    w = balanced_class_weights(np.array([0] * 90 + [1] * 10), np.array([0, 1]))
    np.testing.assert_allclose(w, [100 / 180, 100 / 20])


def test_balancing_raises_minority_recall():
    rng = np.random.default_rng(4)
    y = (rng.random(400) < 0.1).astype(int)
    x = rng.normal(size=(400, 3)) + 1.0 * y[:, None]
    recall = {}
    for balanced in (True, False):
        m = fit_svm(x, y, epochs=50, balanced=balanced)
        recall[balanced] = np.mean(m.predict(x[y == 1]) == 1)
    assert recall[True] > recall[False]


def test_binary_decision_is_antisymmetric_and_ties_go_low():
    x, y = _overlapping(np.random.default_rng(5))
    m = fit_svm(x, y, epochs=5)
    s = m.decision_function(x)
    np.testing.assert_array_equal(s[:, 0], -s[:, 1])
    tied = LinearSvmModel(np.zeros((1, 2)), np.zeros(1), np.array([3, 7]), 1.0, np.ones(2),
                          np.zeros(2), np.ones(2))
    assert tied.predict(np.array([[1.0, 2.0]]))[0] == 3


def test_multiclass_one_vs_rest():
    rng = np.random.default_rng(6)
    y = rng.integers(0, 4, 300)
    centers = np.array([[0, 0], [5, 0], [0, 5], [5, 5]])
    x = centers[y] + rng.normal(scale=0.5, size=(300, 2))
    m = fit_svm(x, y, epochs=30)
    assert m.weights.shape == (4, 2)
    assert np.mean(m.predict(x) == y) > 0.95


def test_invariant_to_feature_scaling():
    rng = np.random.default_rng(7)
    x, y = _overlapping(rng)
    scaled = x * np.array([1e3, 1e-2, 5.0, 1.0]) + 17
    a = fit_svm(x, y, epochs=20, seed=1).predict(x)
    b = fit_svm(scaled, y, epochs=20, seed=1).predict(scaled)
    np.testing.assert_array_equal(a, b)


def test_single_class_rejected():
    with pytest.raises(SingleClassTrainingSet):
        fit_svm(np.zeros((5, 2)), [1] * 5)


def test_save_load(tmp_path):
    x, y = _overlapping(np.random.default_rng(8))
    m = fit_svm(x, y, epochs=5)
    m.save(tmp_path / "svm.npz")
    np.testing.assert_array_equal(LinearSvmModel.load(tmp_path / "svm.npz").decision_function(x),
                                  m.decision_function(x))


def test_twenty_point_objective_within_one_percent():
    rng = np.random.default_rng(12)
    y = np.arange(20) % 2
    x = rng.normal(size=(20, 3)) + 1.0 * y[:, None]
    m = fit_svm(x, y, seed=0)
    z = m.standardize(x)
    y_pm = np.where(y == 1, 1.0, -1.0)
    ours = hinge_objective(m.weights[0], m.bias[0], z, y_pm, np.ones(20), 1.0)
    assert ours <= qp_optimum(z, y_pm, np.ones(20), 1.0) * 1.01


def test_one_dimensional_separable():
    m = fit_svm(np.array([[-1.0], [1.0]]), [0, 1])
    assert list(m.predict(np.array([[-1.0], [1.0]]))) == [0, 1]
    assert list(m.predict(np.array([[-5.0], [5.0]]))) == [0, 1]


def test_separable_gaussians_fully_separated():
    rng = np.random.default_rng(13)
    y = np.arange(180) % 2
    x = rng.normal(size=(180, 17)) + np.where(y[:, None] == 1, 3.0, -3.0)
    assert np.mean(fit_svm(x, y).predict(x) == y) == 1.0


def test_duplicating_samples_keeps_predictions():
    rng = np.random.default_rng(14)
    y = np.arange(60) % 2
    x = rng.normal(size=(60, 3)) + 4.0 * y[:, None]
    grid = rng.normal(size=(200, 3)) * 3 + 2
    once = fit_svm(x, y, seed=2).predict(grid)
    twice = fit_svm(np.vstack([x, x]), np.concatenate([y, y]), seed=2).predict(grid)
    assert np.mean(once == twice) >= 0.98
