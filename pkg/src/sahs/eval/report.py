"""Evaluation report document and its plain-text tables.

Document layout (JSON)::

    {
      "format": "sahs-eval-report/1",
      "config_hash": "<sha256 of the effective settings and input features>",
      "seed": 7,
      "settings": {...},
      "tasks": {
        "binary5": {
          "task", "cutoff", "classes", "n_subjects", "class_counts", "k", "folds",
          "classifiers": {
            "svm": {"folds": [{"fold", "n_test", "confusion", "sensitivity",
                               "specificity", "accuracy"}, ...],
                    "summary": {"accuracy": {"mean", "se", "min", "max", "n"}, ...},
                    "cumulative_confusion", "cumulative_accuracy", "cumulative_metrics"},
            "abcart": {...}, "dnn": {...}},
          "anova": {"accuracy": {"status", "F", "df_between", "df_error", "p",
                                 "pairwise": {"svm-abcart": {"t", "p_adjusted"}, ...}}, ...}
        },
        "fourclass": {... same, with only "accuracy" per fold ...}
      }
    }

Rates are fractions in [0, 1]; ``null`` marks an undefined value.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterable

REPORT_FORMAT = "sahs-eval-report/1"
DISPLAY = {"svm": "SVM", "abcart": "AB-CART", "dnn": "DNN"}


def config_hash(settings: dict) -> str:
    blob = json.dumps(settings, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def build_report(task_blocks: Iterable[dict], seed: int, settings: dict) -> dict:
    return {
        "format": REPORT_FORMAT,
        "config_hash": config_hash(settings),
        "seed": seed,
        "settings": settings,
        "tasks": {b["task"]: b for b in task_blocks},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _pct(summary: dict) -> str:
    if summary["mean"] is None:
        return "n/a"
    se = "n/a" if summary["se"] is None else f"{100 * summary['se']:.2f}"
    return f"{100 * summary['mean']:.2f} ± {se}"


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))).rstrip()
                     for r in rows)


def binary_table(report: dict) -> str:
    """Sensitivity / specificity / accuracy per cutoff (mean ± standard error, %)."""
    tasks = [t for t in report["tasks"].values() if t["cutoff"] is not None]
    if not tasks:
        return ""
    names = list(tasks[0]["classifiers"])
    head1 = [""] + [f"{m.capitalize()}" if i == 0 else "" for m in ("sensitivity", "specificity", "accuracy")
                    for i in range(len(names))]
    head2 = [""] + [DISPLAY[n] for _ in range(3) for n in names]
    rows = [head1, head2]
    for t in tasks:
        row = [f"Cutoff {t['cutoff']}"]
        for m in ("sensitivity", "specificity", "accuracy"):
            row += [_pct(t["classifiers"][n]["summary"][m]) for n in names]
        rows.append(row)
    lines = ["10-fold sensitivity, specificity and accuracy (%, mean ± standard error)", _align(rows)]
    for t in tasks:
        for metric, block in t["anova"].items():
            if block.get("status") != "ok":
                lines.append(f"Cutoff {t['cutoff']} {metric}: ANOVA {block.get('status')}")
                continue
            f = "inf" if block["F"] is None else f"{block['F']:.3f}"
            pairs = ", ".join(
                f"{'/'.join(DISPLAY[x] for x in k.split('-'))} p={'n/a' if v['p_adjusted'] is None else format(v['p_adjusted'], '.4g')}"
                for k, v in block["pairwise"].items()
            )
            lines.append(
                f"Cutoff {t['cutoff']} {metric}: F({block['df_between']},{block['df_error']})={f}, "
                f"p={block['p']:.4g}; pairwise (Bonferroni) {pairs}"
            )
    return "\n".join(lines) + "\n"


def confusion_table(report: dict, task: str = "fourclass") -> str:
    """Cumulative confusion matrices side by side, rows actual, columns predicted."""
    if task not in report["tasks"]:
        return ""
    t = report["tasks"][task]
    names = list(t["classifiers"])
    short = [c[:8] for c in t["classes"]]
    k = len(short)
    rows = [[""] + [DISPLAY[n] if i == 0 else "" for n in names for i in range(k)],
            ["Actual \\ Predicted"] + short * len(names)]
    for r, cls in enumerate(short):
        row = [cls]
        for n in names:
            row += [str(v) for v in t["classifiers"][n]["cumulative_confusion"][r]]
        rows.append(row)
    total = sum(map(sum, t["classifiers"][names[0]]["cumulative_confusion"]))
    lines = [f"Cumulative {t['k']}-fold confusion matrices, task {task} (total {total})", _align(rows)]
    lines.append("Overall accuracy: " + ", ".join(
        f"{DISPLAY[n]} {100 * t['classifiers'][n]['cumulative_accuracy']:.2f}%" for n in names))
    return "\n".join(lines) + "\n"


def render_tables(report: dict) -> str:
    parts = [binary_table(report)]
    parts += [confusion_table(report, name) for name in report["tasks"] if name == "fourclass"]
    return "\n".join(p for p in parts if p)
