import math

import numpy as np
import pytest

from helpers import exhaustive_split
from sahs.abcart import (ALPHA_CAP, AbCartModel, best_split, fit_adaboost, fit_cart, gini, samme_alpha)
from sahs.errors import EmptySampleSet, SingleClassTrainingSet


def test_gini_values():
    assert gini([1, 1]) == pytest.approx(0.5)
    assert gini([3, 0]) == 0.0
    assert gini([1, 1, 1, 1]) == pytest.approx(0.75)


def test_split_matches_exhaustive_search():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n, d, k = int(rng.integers(5, 25)), int(rng.integers(1, 4)), int(rng.integers(2, 4))
        x = rng.integers(0, 6, size=(n, d)).astype(float)  # small grid forces ties
        y = rng.integers(0, k, n)
        w = rng.random(n) + 0.1
        w /= w.sum()
        got, want = best_split(x, y, w, k), exhaustive_split(x, y, w, k)
        if want is None:
            assert got is None
            continue
        assert got[1:] == want[1:]
        assert got[0] == pytest.approx(want[0], abs=1e-12)


def test_tree_depth_and_purity():
    rng = np.random.default_rng(1)
    x = rng.random((200, 3))
    y = ((x[:, 0] > 0.5) ^ (x[:, 1] > 0.3)).astype(int)
    tree = fit_cart(x, y, max_depth=3)
    assert tree.depth() <= 3
    assert np.mean(tree.predict(x) == y) > 0.97
    assert fit_cart(x, y, max_depth=0).depth() == 0


def test_empty_input():
    with pytest.raises(EmptySampleSet):
        fit_cart(np.zeros((0, 2)), np.zeros(0, int))


def test_samme_alpha():
    assert samme_alpha(0.25, 2) == pytest.approx(math.log(3))
    assert samme_alpha(0.25, 4) == pytest.approx(math.log(3) + math.log(3))
    assert samme_alpha(0.0, 3) == ALPHA_CAP == pytest.approx(math.log(1e12))


def _xor(rng, n=300):
    x = rng.uniform(-1, 1, size=(n, 2))
    y = ((x[:, 0] > 0) != (x[:, 1] > 0)).astype(int)
    return x, y


def test_boosted_stumps_beat_best_stump_on_xor_like_data():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, size=(400, 2))
    y = (x[:, 0] + x[:, 1] > 0.3).astype(int)  # oblique boundary: stumps are weak
    stump = fit_cart(x, y, max_depth=1)
    boosted = fit_adaboost(x, y, num_rounds=50, max_depth=1)
    assert np.mean(boosted.predict(x) == y) > np.mean(stump.predict(x) == y) + 0.05


def test_depth_three_boosting_solves_xor():
    x, y = _xor(np.random.default_rng(3))
    m = fit_adaboost(x, y, num_rounds=20, max_depth=3)
    assert np.mean(m.predict(x) == y) > 0.98


def test_reweighting_matches_samme_update():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(120, 3))
    y = rng.integers(0, 3, 120)
    m = fit_adaboost(x, y, num_rounds=3, max_depth=1)
    w = np.full(120, 1 / 120)
    for tree, alpha, err in zip(m.trees, m.alphas, m.errors):
        wrong = tree.predict(x) != y
        assert err == pytest.approx(w[wrong].sum(), abs=1e-12)
        assert alpha == pytest.approx(samme_alpha(err, 3))
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
        assert w.sum() == pytest.approx(1.0)


def test_perfect_first_round_stops():
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    m = fit_adaboost(x, [0, 0, 1, 1], num_rounds=10)
    assert len(m.trees) == 1 and m.alphas == [ALPHA_CAP]


def test_labels_are_mapped_back():
    x = np.array([[0.0], [1.0], [2.0], [3.0]])
    m = fit_adaboost(x, ["b", "b", "z", "z"])
    assert list(m.predict(x)) == ["b", "b", "z", "z"]
    with pytest.raises(SingleClassTrainingSet):
        fit_adaboost(x, [1, 1, 1, 1])


def test_save_load(tmp_path):
    x, y = _xor(np.random.default_rng(5), 100)
    m = fit_adaboost(x, y, num_rounds=8, max_depth=2)
    m.save(tmp_path / "ab.npz")
    back = AbCartModel.load(tmp_path / "ab.npz")
    np.testing.assert_array_equal(back.votes(x), m.votes(x))
    np.testing.assert_array_equal(back.predict(x), m.predict(x))


def test_split_survives_weights_spanning_many_orders_of_magnitude():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(60, 3))
    y = rng.integers(0, 3, 60)
    w = 10.0 ** rng.uniform(-30, 0, 60)
    w[:5] = 0.0
    with np.errstate(all="raise"):
        imp, feature, threshold = best_split(x, y, w / w.sum(), 3)
        tree = fit_cart(x, y, w, max_depth=3)
    assert np.isfinite(imp) and 0 <= feature < 3 and np.isfinite(threshold)
    assert tree.depth() <= 3
