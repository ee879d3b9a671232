"""AdaBoost (SAMME) over weighted-Gini CART trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .errors import DimensionMismatch, EmptySampleSet, SingleClassTrainingSet

FORMAT_TAG = "sahs-abcart/1"
ALPHA_CAP = math.log(1e12)
# impurities are normalised to [0, 1]; differences below this are ties
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class AbCartConfig:
    num_rounds: int = 50
    max_depth: int = 3

    def __post_init__(self):
        if self.num_rounds <= 0 or self.max_depth < 0:
            raise ValueError("num_rounds must be positive and max_depth non-negative")


@dataclass
class Node:
    label: int
    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class CartTree:
    root: Node
    n_features: int
    max_depth: int

    def predict(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {x.shape[1]}")
        out = np.empty(len(x), dtype=np.int64)
        self._fill(self.root, x, np.arange(len(x)), out)
        return out

    def _fill(self, node: Node, x, idx, out):
        if node.is_leaf:
            out[idx] = node.label
            return
        go_left = x[idx, node.feature] <= node.threshold
        self._fill(node.left, x, idx[go_left], out)
        self._fill(node.right, x, idx[~go_left], out)

    def depth(self) -> int:
        def walk(node):
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def gini(class_weights) -> float:
    """Weighted Gini impurity of a node given per-class weight totals."""
    w = np.asarray(class_weights, dtype=np.float64)
    total = w.sum()
    if total <= 0:
        return 0.0
    p = w / total
    return float(1.0 - np.sum(p * p))


def _majority(class_weight: np.ndarray) -> int:
    # argmax picks the first maximum, i.e. the lowest class index on ties
    return int(np.argmax(class_weight))


def _child_gini(class_weights: np.ndarray) -> np.ndarray:
    """Weight times Gini impurity per row; an empty (zero-weight) child scores 0."""
    mass = class_weights.sum(axis=1)
    sq = np.sum(class_weights * class_weights, axis=1)
    safe = np.where(mass > 0, mass, 1.0)
    return np.where(mass > 0, mass - sq / safe, 0.0)


def best_split(x: np.ndarray, y: np.ndarray, w: np.ndarray, n_classes: int):
    """Lowest weighted child impurity over all (feature, midpoint) candidates.

    Returns ``(impurity, feature, threshold)`` or ``None`` if every feature is
    constant. Impurities within 1e-12 of the minimum count as ties,
    resolved by lowest feature index, then lowest threshold.
    """
    total = w.sum()
    onehot = np.zeros((len(y), n_classes))
    onehot[np.arange(len(y)), y] = w
    per_feature = []
    for feature in range(x.shape[1]):
        order = np.argsort(x[:, feature], kind="stable")
        xs = x[order, feature]
        sorted_w = onehot[order]
        # candidate cut after position i when xs[i] < xs[i + 1]
        cut = np.nonzero(xs[:-1] < xs[1:])[0]
        if cut.size == 0:
            continue
        left = np.cumsum(sorted_w, axis=0)[cut]
        # summed from the far end rather than total - left: boosting weights
        # span many orders of magnitude and the subtraction can cancel to zero
        right = np.cumsum(sorted_w[::-1], axis=0)[::-1][cut + 1]
        gl = _child_gini(left)
        gr = _child_gini(right)
        thresholds = (xs[cut] + xs[cut + 1]) / 2.0
        per_feature.append((feature, (gl + gr) / total, thresholds))
    if not per_feature:
        return None
    lowest = min(float(imp.min()) for _, imp, _ in per_feature)
    for feature, impurity, thresholds in per_feature:
        near = np.nonzero(impurity <= lowest + _TIE_TOL)[0]
        if near.size:
            j = int(near[np.argmin(thresholds[near])])
            return float(impurity[j]), feature, float(thresholds[j])
    raise AssertionError("unreachable")


def fit_cart(features, labels, sample_weights=None, max_depth: int = 3,
             n_classes: int | None = None) -> CartTree:
    """Greedy recursive weighted-Gini tree.

    Labels must be integer class indices. Splitting stops at ``max_depth``,
    on pure nodes, or when no split lowers the impurity.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or len(x) == 0:
        raise EmptySampleSet("no samples to fit")
    if sample_weights is None:
        w = np.full(len(y), 1.0 / len(y))
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("sample weights must be non-negative with a positive sum")
        w = w / w.sum()
    k = int(y.max()) + 1 if n_classes is None else n_classes

    def grow(idx: np.ndarray, depth: int) -> Node:
        cw = np.bincount(y[idx], weights=w[idx], minlength=k)
        node = Node(label=_majority(cw))
        parent = gini(cw)
        if depth >= max_depth or parent == 0.0:
            return node
        found = best_split(x[idx], y[idx], w[idx], k)
        if found is None or found[0] >= parent - _TIE_TOL:
            return node
        _, feature, threshold = found
        go_left = x[idx, feature] <= threshold
        node.feature, node.threshold = feature, threshold
        node.left = grow(idx[go_left], depth + 1)
        node.right = grow(idx[~go_left], depth + 1)
        return node

    return CartTree(grow(np.arange(len(y)), 0), x.shape[1], max_depth)


@dataclass
class AbCartModel:
    trees: list[CartTree]
    alphas: list[float]
    classes: np.ndarray
    num_rounds: int
    errors: list[float] = field(default_factory=list, repr=False)

    def votes(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        scores = np.zeros((len(x), len(self.classes)))
        rows = np.arange(len(x))
        for tree, alpha in zip(self.trees, self.alphas):
            scores[rows, tree.predict(x)] += alpha
        return scores

    def predict(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        idx = np.argmax(self.votes(x), axis=1)
        out = self.classes[idx]
        return out[0] if x.ndim == 1 else out

    def save(self, path) -> None:
        feats, thr, labels, lefts, rights, offsets = [], [], [], [], [], [0]
        for tree in self.trees:
            nodes = []

            def walk(node):
                i = len(nodes)
                nodes.append(node)
                if not node.is_leaf:
                    walk(node.left)
                    walk(node.right)
                return i

            walk(tree.root)
            index = {id(n): i for i, n in enumerate(nodes)}
            for n in nodes:
                feats.append(n.feature)
                thr.append(n.threshold)
                labels.append(n.label)
                lefts.append(-1 if n.is_leaf else index[id(n.left)])
                rights.append(-1 if n.is_leaf else index[id(n.right)])
            offsets.append(len(feats))
        meta = {
            "num_rounds": self.num_rounds,
            "n_features": self.trees[0].n_features,
            "max_depths": [t.max_depth for t in self.trees],
        }
        serialize.save(path, FORMAT_TAG, meta, {
            "feature": np.array(feats, dtype=np.int64),
            "threshold": np.array(thr, dtype=np.float64),
            "label": np.array(labels, dtype=np.int64),
            "left": np.array(lefts, dtype=np.int64),
            "right": np.array(rights, dtype=np.int64),
            "offsets": np.array(offsets, dtype=np.int64),
            "alphas": np.array(self.alphas, dtype=np.float64),
            "classes": self.classes,
        })

    @classmethod
    def load(cls, path) -> "AbCartModel":
        meta, a = serialize.load(path, FORMAT_TAG)
        trees = []
        for t, (lo, hi) in enumerate(zip(a["offsets"][:-1], a["offsets"][1:])):
            # child indices are local to each tree
            def build_local(i):
                g = lo + i
                node = Node(int(a["label"][g]), int(a["feature"][g]), float(a["threshold"][g]))
                if a["left"][g] >= 0:
                    node.left = build_local(int(a["left"][g]))
                    node.right = build_local(int(a["right"][g]))
                return node

            trees.append(CartTree(build_local(0), meta["n_features"], meta["max_depths"][t]))
        return cls(trees, [float(v) for v in a["alphas"]], a["classes"], meta["num_rounds"])


def samme_alpha(error: float, n_classes: int) -> float:
    if error <= 0.0:
        return ALPHA_CAP
    return math.log((1.0 - error) / error) + math.log(n_classes - 1)


def fit_adaboost(features, labels, num_rounds: int = 50, max_depth: int = 3,
                 seed: int = 0) -> AbCartModel:
    """SAMME boosting.

    A round whose weighted error reaches ``1 - 1/K`` is discarded and ends
    training; a perfect round is kept with a capped stage weight and ends
    training. ``seed`` is accepted for interface symmetry: tree fitting is
    deterministic.
    """
    del seed
    x = np.asarray(features, dtype=np.float64)
    y_raw = np.asarray(labels)
    classes = np.unique(y_raw)
    k = len(classes)
    if k < 2:
        raise SingleClassTrainingSet("boosting needs at least two classes")
    y = np.searchsorted(classes, y_raw)

    w = np.full(len(y), 1.0 / len(y))
    trees, alphas, errors = [], [], []
    first = None
    for _ in range(num_rounds):
        tree = fit_cart(x, y, w, max_depth, n_classes=k)
        wrong = tree.predict(x) != y
        err = float(np.sum(w[wrong]))
        if first is None:
            first = tree
        if err >= 1.0 - 1.0 / k:
            break
        alpha = samme_alpha(err, k)
        trees.append(tree)
        alphas.append(alpha)
        errors.append(err)
        if err <= 0.0:
            break
        w = w * np.exp(alpha * wrong)
        w /= w.sum()

    if not trees:
        # nothing beat chance; fall back to the first tree as a plain classifier
        trees, alphas, errors = [first], [1.0], [float("nan")]
    return AbCartModel(trees, alphas, classes, num_rounds, errors)


def predict_abcart(model: AbCartModel, features):
    return model.predict(features)
