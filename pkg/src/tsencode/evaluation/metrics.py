"""Rank AUROC and 2x2 odds ratios."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from ..errors import UndefinedMetricError, ValidationError


def _binary(v, name: str) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1 or a.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d vector")
    if not np.all((a == 0) | (a == 1)):
        raise ValidationError(f"{name} must be binary 0/1")
    return a.astype(bool)


def auroc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted as one half.

    Computed from the Mann-Whitney U statistic on mid-ranks.
    """
    s = np.asarray(scores, dtype=float)
    y = _binary(labels, "labels")
    if s.shape != y.shape:
        raise ValidationError(f"scores {s.shape} and labels {y.shape} differ in shape")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC is undefined when only one class is present")
    ranks = rankdata(s)  # average ranks for ties
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def contingency_2x2(attr, outcome) -> tuple[int, int, int, int]:
    """Counts (a, b, c, d): attr&outcome, attr&~outcome, ~attr&outcome, neither."""
    x = _binary(attr, "attr")
    o = _binary(outcome, "outcome")
    if x.shape != o.shape:
        raise ValidationError("attr and outcome differ in length")
    return (
        int(np.sum(x & o)),
        int(np.sum(x & ~o)),
        int(np.sum(~x & o)),
        int(np.sum(~x & ~o)),
    )


def odds_ratio_from_table(a: float, b: float, c: float, d: float) -> float:
    """(a*d)/(b*c), adding 0.5 to every cell when any cell is zero (Haldane)."""
    if min(a, b, c, d) < 0:
        raise ValidationError("contingency counts must be non-negative")
    if 0 in (a, b, c, d):
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    return (a * d) / (b * c)


def odds_ratio(attr, outcome) -> float:
    return odds_ratio_from_table(*contingency_2x2(attr, outcome))
