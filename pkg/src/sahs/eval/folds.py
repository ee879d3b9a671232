"""Stratified k-fold splits with a rotating validation fold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import TooFewSubjects


@dataclass(frozen=True)
class FoldSplit:
    fold: int
    train: tuple
    validation: tuple
    test: tuple


def assign_folds(labels: Sequence, k: int, seed: int) -> np.ndarray:
    """Fold index per position, stratified by label.

    Each class is shuffled and dealt round-robin; the dealer continues where
    the previous class stopped, so fold sizes differ by at most one.
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if np.any(counts < k):
        short = {str(c): int(n) for c, n in zip(classes, counts) if n < k}
        raise TooFewSubjects(f"stratified {k}-fold needs >= {k} subjects per class, got {short}")
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=np.int64)
    dealt = 0
    for cls in classes:
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        folds[members] = (dealt + np.arange(len(members))) % k
        dealt += len(members)
    return folds


def make_folds(subject_ids: Sequence[str], labels: Sequence, k: int = 10, seed: int = 0) -> list[FoldSplit]:
    """Fold ``i`` tests on part ``i``, validates on part ``(i + 1) % k``, trains on the rest."""
    if len(subject_ids) != len(labels):
        raise ValueError("subject_ids and labels differ in length")
    if k < 3:
        raise ValueError("need k >= 3 for disjoint train/validation/test parts")
    parts = assign_folds(labels, k, seed)
    ids = list(subject_ids)
    out = []
    for i in range(k):
        val = (i + 1) % k
        out.append(FoldSplit(
            fold=i,
            train=tuple(s for s, p in zip(ids, parts) if p not in (i, val)),
            validation=tuple(s for s, p in zip(ids, parts) if p == val),
            test=tuple(s for s, p in zip(ids, parts) if p == i),
        ))
    return out
