"""One-way repeated-measures ANOVA and Bonferroni-adjusted paired t-tests.

Rows of the input grid are blocks (cross-validation folds), columns are
treatments (classifiers).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import betainc

from ..errors import IncompleteGrid


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df_between: int
    df_error: int
    p: float
    ss_treatment: float
    ss_subjects: float
    ss_error: float


@dataclass(frozen=True)
class PairwiseResult:
    first: int
    second: int
    t: Optional[float]
    p_raw: Optional[float]
    p_adjusted: Optional[float]


_NOISE = 1e-12


def _grid(values) -> np.ndarray:
    try:
        x = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise IncompleteGrid(f"grid is ragged or has missing entries: {exc}") from None
    if x.ndim != 2:
        raise IncompleteGrid("expected a 2-D folds x classifiers grid")
    if x.shape[0] < 2 or x.shape[1] < 2:
        raise IncompleteGrid(f"need >= 2 folds and >= 2 classifiers, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise IncompleteGrid("grid contains undefined or non-finite values")
    return x


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail P(F >= f) via the regularized incomplete beta function."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def t_sf_two_sided(t: float, df: float) -> float:
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def rm_anova(values) -> AnovaResult:
    """F = MS_treatment / MS_error with df (k - 1, (k - 1)(n - 1)).

    When the error sum of squares is zero but treatments differ, F is
    infinite and p is 0.
    """
    x = _grid(values)
    n, k = x.shape
    col = x.mean(axis=0)
    row = x.mean(axis=1)
    grand = col.mean()
    if np.all(col == col[0]):
        ss_treat = 0.0
    else:
        ss_treat = float(n * np.sum((col - grand) ** 2))
    ss_subj = float(k * np.sum((row - grand) ** 2))
    resid = x - row[:, None] - col[None, :] + grand
    ss_err = float(np.sum(resid**2))
    # residuals that are pure rounding noise (e.g. a constant offset between columns)
    if ss_err <= _NOISE * float(np.sum((x - grand) ** 2)):
        ss_err = 0.0
    df_b, df_e = k - 1, (k - 1) * (n - 1)
    if ss_treat == 0.0:
        f = 0.0
    elif ss_err == 0.0:
        f = math.inf
    else:
        f = (ss_treat / df_b) / (ss_err / df_e)
    return AnovaResult(f, df_b, df_e, f_sf(f, df_b, df_e), ss_treat, ss_subj, ss_err)


def paired_t(a, b) -> tuple[Optional[float], Optional[float]]:
    """(t, two-sided p) of a paired t-test, or ``(None, None)`` when undefined."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    n = len(d)
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd <= _NOISE * float(np.max(np.abs(d))):
        if np.all(d == 0):
            return 0.0, 1.0
        return None, None
    t = mean / (sd / math.sqrt(n))
    return t, t_sf_two_sided(t, n - 1)


def pairwise_compare(values) -> list[PairwiseResult]:
    """Paired t-test for every column pair, Bonferroni-adjusted (capped at 1)."""
    x = _grid(values)
    pairs = list(itertools.combinations(range(x.shape[1]), 2))
    out = []
    for i, j in pairs:
        t, p = paired_t(x[:, i], x[:, j])
        adj = None if p is None else min(1.0, p * len(pairs))
        out.append(PairwiseResult(i, j, t, p, adj))
    return out
