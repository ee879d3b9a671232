"""Fully connected tanh network with a softmax output, trained with RMSprop.

Everything (forward pass, backpropagation, optimizer) is plain numpy in
float64. Inputs are z-scored with statistics taken from the training set and
stored on the model.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import serialize
from .errors import DimensionMismatch, EmptyTrainingSet

DEFAULT_HIDDEN = (1024, 512, 256, 128, 64, 32, 16, 8, 4)
FORMAT_TAG = "sahs-mlp/1"

# floor for log() inside the cross-entropy
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int = 17
    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN
    num_classes: int = 2
    learning_rate: float = 1e-3
    rms_decay: float = 0.9
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        sizes = (self.input_dim, *self.hidden_sizes, self.num_classes)
        if any(s <= 0 for s in sizes):
            raise ValueError(f"layer sizes must be positive: {sizes}")
        if self.num_classes < 2:
            raise ValueError("need at least two classes")
        if not 0 < self.rms_decay < 1:
            raise ValueError("rms_decay must lie in (0, 1)")
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise ValueError("learning_rate and epsilon must be positive")
        if self.batch_size <= 0 or self.max_epochs <= 0:
            raise ValueError("batch_size and max_epochs must be positive")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, self.num_classes)


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss: float = float("nan")


@dataclass
class MlpModel:
    config: MlpConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    acc_weights: list[np.ndarray]
    acc_biases: list[np.ndarray]
    feature_mean: np.ndarray
    feature_scale: np.ndarray

    @classmethod
    def initialize(cls, config: MlpConfig, rng: np.random.Generator | None = None) -> "MlpModel":
        """Glorot-uniform weights, zero biases, identity standardization."""
        if rng is None:
            rng = np.random.default_rng(config.seed)
        sizes = config.layer_sizes
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(
            config=config,
            weights=weights,
            biases=biases,
            acc_weights=[np.zeros_like(w) for w in weights],
            acc_biases=[np.zeros_like(b) for b in biases],
            feature_mean=np.zeros(config.input_dim),
            feature_scale=np.ones(config.input_dim),
        )

    def copy(self) -> "MlpModel":
        return MlpModel(
            config=self.config,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            acc_weights=[a.copy() for a in self.acc_weights],
            acc_biases=[a.copy() for a in self.acc_biases],
            feature_mean=self.feature_mean.copy(),
            feature_scale=self.feature_scale.copy(),
        )

    def predict(self, features) -> np.ndarray:
        return np.argmax(forward(self, features), axis=-1)

    def standardize(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=np.float64)
        if x.shape[-1] != self.config.input_dim:
            raise DimensionMismatch(f"expected {self.config.input_dim} features, got {x.shape[-1]}")
        return (x - self.feature_mean) / self.feature_scale

    def save(self, path) -> None:
        arrays = {"feature_mean": self.feature_mean, "feature_scale": self.feature_scale}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"W{i}"] = w
            arrays[f"b{i}"] = b
            arrays[f"accW{i}"] = self.acc_weights[i]
            arrays[f"accb{i}"] = self.acc_biases[i]
        serialize.save(path, FORMAT_TAG, {"config": asdict(self.config)}, arrays)

    @classmethod
    def load(cls, path) -> "MlpModel":
        meta, arrays = serialize.load(path, FORMAT_TAG)
        config = MlpConfig(**meta["config"])
        n = len(config.layer_sizes) - 1
        return cls(
            config=config,
            weights=[arrays[f"W{i}"] for i in range(n)],
            biases=[arrays[f"b{i}"] for i in range(n)],
            acc_weights=[arrays[f"accW{i}"] for i in range(n)],
            acc_biases=[arrays[f"accb{i}"] for i in range(n)],
            feature_mean=arrays["feature_mean"],
            feature_scale=arrays["feature_scale"],
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _activations(model: MlpModel, z: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    acts = [z]
    h = z
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.tanh(h @ w + b)
        acts.append(h)
    logits = h @ model.weights[-1] + model.biases[-1]
    return acts, logits


def forward(model: MlpModel, features) -> np.ndarray:
    """Class probabilities for one feature vector or a batch of them."""
    z = model.standardize(features)
    _, logits = _activations(model, np.atleast_2d(z))
    probs = softmax(logits)
    return probs[0] if z.ndim == 1 else probs


def cross_entropy(probs: np.ndarray, onehot: np.ndarray) -> float:
    return float(-np.mean(np.sum(onehot * np.log(np.maximum(probs, _LOG_FLOOR)), axis=1)))


def backprop(model: MlpModel, features, onehot) -> Gradients:
    """Gradients of the batch-mean cross-entropy with respect to every parameter."""
    z = np.atleast_2d(model.standardize(features))
    y = np.atleast_2d(np.asarray(onehot, dtype=np.float64))
    if y.shape != (z.shape[0], model.config.num_classes):
        raise DimensionMismatch(f"targets of shape {y.shape} do not match batch of {z.shape[0]}")
    acts, logits = _activations(model, z)
    probs = softmax(logits)

    n_layers = len(model.weights)
    grad_w: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    grad_b: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    delta = (probs - y) / z.shape[0]
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = acts[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ model.weights[layer].T) * (1.0 - acts[layer] ** 2)
    return Gradients(grad_w, grad_b, cross_entropy(probs, y))


def rmsprop_step(model: MlpModel, grads: Gradients) -> MlpModel:
    """One in-place RMSprop update; returns ``model`` for chaining."""
    cfg = model.config
    rho, lr, eps = cfg.rms_decay, cfg.learning_rate, cfg.epsilon
    pairs = zip(
        model.weights + model.biases,
        model.acc_weights + model.acc_biases,
        grads.weights + grads.biases,
    )
    for param, acc, g in pairs:
        if param.shape != g.shape:
            raise DimensionMismatch(f"gradient shape {g.shape} does not match parameter {param.shape}")
        buf = np.multiply(g, g)
        buf *= 1.0 - rho
        acc *= rho
        acc += buf
        np.sqrt(acc, out=buf)
        buf += eps
        np.divide(g, buf, out=buf)
        buf *= lr
        param -= buf
    return model


@dataclass
class TrainingTrace:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1

    @property
    def best_val_accuracy(self) -> float:
        return self.val_accuracy[self.best_epoch]


def _check_labels(y: np.ndarray, num_classes: int) -> np.ndarray:
    y = np.asarray(y)
    if y.size and (y.min() < 0 or y.max() >= num_classes or not np.all(y == np.round(y))):
        raise ValueError(f"labels must be integers in [0, {num_classes})")
    return y.astype(np.int64)


def train(config: MlpConfig, train_set, val_set) -> tuple[MlpModel, TrainingTrace]:
    """Mini-batch RMSprop; returns the epoch snapshot with the best validation accuracy.

    ``train_set`` and ``val_set`` are ``(features, labels)`` pairs. Ties in
    validation accuracy keep the earliest epoch.
    """
    x_tr, y_tr = np.asarray(train_set[0], dtype=np.float64), train_set[1]
    x_va, y_va = np.asarray(val_set[0], dtype=np.float64), val_set[1]
    if len(x_tr) == 0:
        raise EmptyTrainingSet("training set is empty")
    if len(x_va) == 0:
        raise EmptyTrainingSet("validation set is empty")
    y_tr = _check_labels(y_tr, config.num_classes)
    y_va = _check_labels(y_va, config.num_classes)
    if len(np.unique(y_tr)) < 2:
        warnings.warn("training set contains a single class", RuntimeWarning, stacklevel=2)

    rng = np.random.default_rng(config.seed)
    model = MlpModel.initialize(config, rng)
    model.feature_mean = x_tr.mean(axis=0)
    scale = x_tr.std(axis=0)
    model.feature_scale = np.where(scale > 0, scale, 1.0)

    eye = np.eye(config.num_classes)
    trace = TrainingTrace()
    best = None
    n = len(x_tr)
    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            grads = backprop(model, x_tr[idx], eye[y_tr[idx]])
            rmsprop_step(model, grads)
            loss_sum += grads.loss * len(idx)
        trace.train_loss.append(loss_sum / n)
        acc = float(np.mean(model.predict(x_va) == y_va))
        trace.val_accuracy.append(acc)
        if best is None or acc > trace.val_accuracy[trace.best_epoch]:
            trace.best_epoch = epoch
            best = model.copy()
    return best, trace
