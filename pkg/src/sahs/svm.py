"""Linear soft-margin SVM with balanced class weights.

Each binary problem minimises::

    0.5 * |w|^2 + C * sum_i c[y_i] * max(0, 1 - y_i * (w . x_i + b))

with class weights ``c[k] = N / (K * N_k)``. The solver is Pegasos-style
stochastic subgradient descent (step ``1 / (lam * t)``, ``lam = 1 / (C N)``)
over seed-shuffled epochs. Multiclass problems use one-vs-rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import serialize
from .errors import DimensionMismatch, SingleClassTrainingSet

FORMAT_TAG = "sahs-svm/1"


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    epochs: int = 100
    balanced: bool = True

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")


@dataclass
class LinearSvmModel:
    weights: np.ndarray  # (n_machines, n_features)
    bias: np.ndarray  # (n_machines,)
    classes: np.ndarray
    C: float
    class_weights: np.ndarray
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    objective_trace: list[list[float]] = field(default_factory=list, repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def standardize(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {x.shape[-1]}")
        return (x - self.feature_mean) / self.feature_scale

    def decision_function(self, features) -> np.ndarray:
        """Per-class scores; a binary model returns (-f, f) so argmax applies."""
        z = self.standardize(features)
        scores = np.atleast_2d(z) @ self.weights.T + self.bias
        if len(self.classes) == 2:
            scores = np.hstack([-scores, scores])
        return scores[0] if z.ndim == 1 else scores

    def predict(self, features) -> np.ndarray:
        scores = self.decision_function(features)
        # argmax returns the first maximum: ties go to the lowest class index
        return self.classes[np.argmax(scores, axis=-1)]

    def save(self, path) -> None:
        serialize.save(
            path,
            FORMAT_TAG,
            {"C": self.C},
            {
                "weights": self.weights,
                "bias": self.bias,
                "classes": self.classes,
                "class_weights": self.class_weights,
                "feature_mean": self.feature_mean,
                "feature_scale": self.feature_scale,
            },
        )

    @classmethod
    def load(cls, path) -> "LinearSvmModel":
        meta, a = serialize.load(path, FORMAT_TAG)
        return cls(
            a["weights"], a["bias"], a["classes"], meta["C"],
            a["class_weights"], a["feature_mean"], a["feature_scale"],
        )


def balanced_class_weights(y: np.ndarray, classes: np.ndarray) -> np.ndarray:
    counts = np.array([np.sum(y == c) for c in classes], dtype=np.float64)
    return len(y) / (len(classes) * counts)


def hinge_objective(w, b, x, y_pm, sample_weights, C) -> float:
    margins = 1.0 - y_pm * (x @ w + b)
    return 0.5 * float(w @ w) + C * float(np.sum(sample_weights * np.maximum(margins, 0.0)))


def optimal_bias(w, x, y_pm, sample_weights) -> float:
    """Exact minimiser over ``b`` of the weighted hinge sum for fixed ``w``.

    The sum is convex and piecewise linear in ``b`` with kinks at
    ``y_i - w . x_i``, so the minimum sits on one of them; ties go to the
    smallest kink.
    """
    m = x @ w
    kinks = np.unique(y_pm - m)
    margins = 1.0 - y_pm[None, :] * (m[None, :] + kinks[:, None])
    losses = np.maximum(margins, 0.0) @ sample_weights
    return float(kinks[np.argmin(losses)])


def fit_binary(x, y_pm, sample_weights, C, epochs, rng) -> tuple[np.ndarray, float, list[float]]:
    """Pegasos on one +/-1 problem.

    The unregularised bias takes huge early steps (the first is ``C N``) and
    can stall far from its optimum on separable data, so at every epoch
    boundary it is reset to the exact optimum for the current ``w``.
    Returns the epoch-boundary iterate with the lowest objective, together
    with the best-so-far objective after every epoch (so the trace never
    increases even though raw stochastic iterates do).
    """
    n, d = x.shape
    lam = 1.0 / (C * n)
    w = np.zeros(d)
    b = optimal_bias(w, x, y_pm, sample_weights)
    best_w, best_b = w.copy(), b
    best_obj = hinge_objective(w, b, x, y_pm, sample_weights, C)
    trace = []
    rows = [x[i] for i in range(n)]
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            xi = rows[i]
            margin = y_pm[i] * (xi @ w + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                step = eta * sample_weights[i] * y_pm[i]
                w += step * xi
                b += step
        b = optimal_bias(w, x, y_pm, sample_weights)
        obj = hinge_objective(w, b, x, y_pm, sample_weights, C)
        if obj < best_obj:
            best_obj, best_w, best_b = obj, w.copy(), b
        trace.append(best_obj)
    return best_w, best_b, trace


def fit_svm(features, labels, C: float = 1.0, seed: int = 0, *, epochs: int = 100,
            balanced: bool = True) -> LinearSvmModel:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    classes = np.unique(y)
    if len(classes) < 2:
        raise SingleClassTrainingSet("SVM training needs at least two classes")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    z = (x - mean) / scale

    cw = balanced_class_weights(y, classes) if balanced else np.ones(len(classes))
    per_sample = cw[np.searchsorted(classes, y)]

    # Every machine replays the same shuffles, so with two classes the
    # "class 0 vs rest" machine is exactly the negation of "class 1 vs rest"
    # and one machine suffices.
    targets = classes[1:] if len(classes) == 2 else classes
    ws, bs, traces = [], [], []
    for cls in targets:
        y_pm = np.where(y == cls, 1.0, -1.0)
        w, b, trace = fit_binary(z, y_pm, per_sample, C, epochs, np.random.default_rng(seed))
        ws.append(w)
        bs.append(b)
        traces.append(trace)
    return LinearSvmModel(np.array(ws), np.array(bs), classes, C, cw, mean, scale, traces)


def predict_svm(model: LinearSvmModel, features) -> np.ndarray:
    return model.predict(features)
