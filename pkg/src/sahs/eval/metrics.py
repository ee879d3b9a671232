"""Confusion matrices and the binary / multiclass rates derived from them.

Undefined rates (zero denominators) are reported as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


def confusion_matrix(actual, predicted, n_classes: int) -> np.ndarray:
    """Rows are actual classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(actual, dtype=np.int64), np.asarray(predicted, dtype=np.int64)), 1)
    return cm


def _ratio(num: float, den: float) -> Optional[float]:
    return None if den == 0 else num / den


@dataclass(frozen=True)
class BinaryMetrics:
    sensitivity: Optional[float]
    specificity: Optional[float]
    accuracy: Optional[float]


def metrics(confusion, positive_class: int = 1) -> BinaryMetrics:
    cm = np.asarray(confusion)
    if cm.shape != (2, 2):
        raise ValueError(f"binary metrics need a 2x2 matrix, got {cm.shape}")
    neg = 1 - positive_class
    tp, fn = cm[positive_class, positive_class], cm[positive_class, neg]
    tn, fp = cm[neg, neg], cm[neg, positive_class]
    return BinaryMetrics(
        sensitivity=_ratio(float(tp), float(tp + fn)),
        specificity=_ratio(float(tn), float(tn + fp)),
        accuracy=_ratio(float(tp + tn), float(cm.sum())),
    )


def multiclass_accuracy(confusion) -> Optional[float]:
    cm = np.asarray(confusion)
    return _ratio(float(np.trace(cm)), float(cm.sum()))
