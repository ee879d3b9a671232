"""Cross-validated comparison of the three classifiers on one task."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .. import abcart, mlp, svm
from ..errors import TooFewSubjects
from .folds import make_folds
from .labels import SeverityLabel, binarize
from .metrics import confusion_matrix, metrics, multiclass_accuracy
from .stats import pairwise_compare, rm_anova

log = logging.getLogger(__name__)

TASKS = ("binary5", "binary15", "binary30", "fourclass")
CLASSIFIERS = ("svm", "abcart", "dnn")
BINARY_METRICS = ("sensitivity", "specificity", "accuracy")
_TASK_KEY = {"binary5": 5, "binary15": 15, "binary30": 30, "fourclass": 4}
_CLASSIFIER_KEY = {"dnn": 1, "svm": 2, "abcart": 3}


@dataclass(frozen=True)
class Subject:
    subject_id: str
    features: np.ndarray
    ahi: float
    label: SeverityLabel


@dataclass(frozen=True)
class ExperimentConfig:
    k: int = 10
    mlp: mlp.MlpConfig = field(default_factory=mlp.MlpConfig)
    svm: svm.SvmConfig = field(default_factory=svm.SvmConfig)
    abcart: abcart.AbCartConfig = field(default_factory=abcart.AbCartConfig)
    # No / Mild / Moderate / Severe counts of the balanced four-class subsample
    fourclass_counts: tuple[int, int, int, int] = (70, 70, 70, 60)


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def cutoff_of(task: str) -> Optional[int]:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    return None if task == "fourclass" else _TASK_KEY[task]


def balanced_subsample(subjects: Sequence[Subject], counts, seed: int) -> list[Subject]:
    """Draw ``counts[c]`` subjects of each severity class uniformly at random."""
    rng = np.random.default_rng(seed)
    chosen = []
    for label, want in zip(SeverityLabel, counts):
        pool = sorted((s for s in subjects if s.label == label), key=lambda s: s.subject_id)
        if len(pool) < want:
            raise TooFewSubjects(f"four-class subsample wants {want} {label.display} subjects, have {len(pool)}")
        picks = rng.choice(len(pool), size=want, replace=False)
        chosen.extend(pool[i] for i in sorted(picks))
    return sorted(chosen, key=lambda s: s.subject_id)


def task_dataset(subjects: Sequence[Subject], task: str, config: ExperimentConfig, seed: int):
    """(subjects, integer labels, class names) for ``task``."""
    cutoff = cutoff_of(task)
    if cutoff is None:
        chosen = balanced_subsample(subjects, config.fourclass_counts, derive_seed(seed, _TASK_KEY[task], 99))
        labels = np.array([int(s.label) for s in chosen])
        return chosen, labels, [l.display for l in SeverityLabel]
    chosen = sorted(subjects, key=lambda s: s.subject_id)
    labels = np.array([binarize(s.ahi, cutoff) for s in chosen])
    return chosen, labels, [f"AHI<{cutoff}", f"AHI>={cutoff}"]


def _fit_predict(name: str, config: ExperimentConfig, n_classes: int, seed: int,
                 train, val, x_test) -> np.ndarray:
    x_tr, y_tr = train
    if name == "dnn":
        cfg = replace(config.mlp, num_classes=n_classes, input_dim=x_tr.shape[1], seed=seed)
        model, _ = mlp.train(cfg, train, val)
        return model.predict(x_test)
    if name == "svm":
        model = svm.fit_svm(x_tr, y_tr, config.svm.C, seed, epochs=config.svm.epochs,
                            balanced=config.svm.balanced)
        return model.predict(x_test)
    if name == "abcart":
        model = abcart.fit_adaboost(x_tr, y_tr, config.abcart.num_rounds, config.abcart.max_depth, seed)
        return model.predict(x_test)
    raise ValueError(f"unknown classifier {name!r}")


def _summary(values: list[Optional[float]]) -> dict:
    defined = [v for v in values if v is not None]
    if not defined:
        return {"mean": None, "se": None, "min": None, "max": None, "n": 0}
    arr = np.array(defined)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else None
    return {"mean": float(arr.mean()), "se": se, "min": float(arr.min()), "max": float(arr.max()),
            "n": len(arr)}


def _anova_block(per_classifier: dict[str, list], names: Sequence[str]) -> dict:
    if len(names) < 2:
        return {"status": "skipped: fewer than two classifiers"}
    columns = [per_classifier[n] for n in names]
    if any(v is None for col in columns for v in col):
        return {"status": "skipped: undefined fold values"}
    grid = np.array(columns).T
    res = rm_anova(grid)
    pairs = {
        f"{names[p.first]}-{names[p.second]}": {"t": _finite(p.t), "p_adjusted": p.p_adjusted}
        for p in pairwise_compare(grid)
    }
    return {"status": "ok", "F": _finite(res.F), "df_between": res.df_between,
            "df_error": res.df_error, "p": res.p, "pairwise": pairs}


def _finite(v):
    return None if v is None or not math.isfinite(v) else float(v)


def run_experiment(subjects: Sequence[Subject], task: str, classifiers: Sequence[str] = CLASSIFIERS,
                   seed: int = 0, config: ExperimentConfig | None = None) -> dict:
    """Train and test every classifier on identical folds; returns a JSON-ready block.

    The DNN trains on the 80% part and selects its epoch on the 10% validation
    part; SVM and AB-CART train on the 80% part only. All are scored on the
    same 10% test part.
    """
    config = config or ExperimentConfig()
    unknown = set(classifiers) - set(CLASSIFIERS)
    if unknown or not classifiers:
        raise ValueError(f"classifiers must be drawn from {CLASSIFIERS}, got {sorted(unknown)}")
    classifiers = [c for c in CLASSIFIERS if c in classifiers]
    chosen, labels, class_names = task_dataset(subjects, task, config, seed)
    n_classes = len(class_names)
    ids = [s.subject_id for s in chosen]
    x = np.array([s.features for s in chosen], dtype=np.float64)
    index = {sid: i for i, sid in enumerate(ids)}
    task_key = _TASK_KEY[task]
    folds = make_folds(ids, labels, config.k, derive_seed(seed, task_key, 0))

    per_fold = {c: [] for c in classifiers}
    for split in folds:
        tr = np.array([index[s] for s in split.train])
        va = np.array([index[s] for s in split.validation])
        te = np.array([index[s] for s in split.test])
        for name in classifiers:
            fold_seed = derive_seed(seed, task_key, split.fold + 1, _CLASSIFIER_KEY[name])
            pred = _fit_predict(name, config, n_classes, fold_seed,
                                (x[tr], labels[tr]), (x[va], labels[va]), x[te])
            cm = confusion_matrix(labels[te], pred, n_classes)
            entry = {"fold": split.fold, "n_test": int(len(te)), "confusion": cm.tolist()}
            if n_classes == 2:
                m = metrics(cm, positive_class=1)
                entry.update(sensitivity=m.sensitivity, specificity=m.specificity, accuracy=m.accuracy)
            else:
                entry["accuracy"] = multiclass_accuracy(cm)
            per_fold[name].append(entry)
        log.info("%s fold %d/%d done", task, split.fold + 1, config.k)

    metric_names = BINARY_METRICS if n_classes == 2 else ("accuracy",)
    blocks = {}
    for name in classifiers:
        cumulative = np.sum([np.array(f["confusion"]) for f in per_fold[name]], axis=0)
        block = {
            "folds": per_fold[name],
            "summary": {m: _summary([f[m] for f in per_fold[name]]) for m in metric_names},
            "cumulative_confusion": cumulative.tolist(),
            "cumulative_accuracy": multiclass_accuracy(cumulative),
        }
        if n_classes == 2:
            cm = metrics(cumulative, positive_class=1)
            block["cumulative_metrics"] = {"sensitivity": cm.sensitivity, "specificity": cm.specificity,
                                           "accuracy": cm.accuracy}
        blocks[name] = block

    anova = {m: _anova_block({c: [f[m] for f in per_fold[c]] for c in classifiers}, classifiers)
             for m in metric_names}
    return {
        "task": task,
        "cutoff": cutoff_of(task),
        "classes": class_names,
        "n_subjects": len(chosen),
        "class_counts": np.bincount(labels, minlength=n_classes).tolist(),
        "k": config.k,
        "folds": [{"fold": f.fold, "n_train": len(f.train), "n_validation": len(f.validation),
                   "n_test": len(f.test)} for f in folds],
        "classifiers": blocks,
        "anova": anova,
    }
