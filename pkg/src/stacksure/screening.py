"""Univariate feature screening by Welch t statistic.

Deliberately leak-prone when misused: the statistic must be computed from
training rows only, so protocols re-run screening inside every fold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .utils import as_binary_labels, as_float_matrix, check_both_classes, frozen

__all__ = ["FeatureRanking", "welch_t", "welch_t_columns", "select_top"]

# Relative variance floor: keeps the statistic finite on constant columns,
# which do occur in real copy-number matrices.
_VAR_FLOOR_REL = 1e-12
_VAR_FLOOR_ABS = 1e-300


@dataclass(frozen=True)
class FeatureRanking:
    """|t| per column plus the selected column indices, best first."""

    statistic: np.ndarray
    selected: np.ndarray

    def __post_init__(self):
        stat = np.asarray(self.statistic, dtype=np.float64)
        sel = np.asarray(self.selected, dtype=np.int64)
        if np.any(~np.isfinite(stat)) or np.any(stat < 0):
            raise ValueError("statistics must be finite and non-negative")
        if sel.shape[0] > stat.shape[0] or np.unique(sel).shape[0] != sel.shape[0]:
            raise ValueError("selected indices must be distinct")
        if sel.shape[0] and (sel.min() < 0 or sel.max() >= stat.shape[0]):
            raise ValueError("selected indices out of range")
        object.__setattr__(self, "statistic", frozen(stat))
        object.__setattr__(self, "selected", frozen(sel))

    @property
    def m(self) -> int:
        return self.selected.shape[0]


def _group_stats(X: np.ndarray, y: np.ndarray):
    n1 = int(np.sum(y == 1))
    n0 = y.shape[0] - n1
    if n0 < 2 or n1 < 2:
        raise ValueError("both groups need at least 2 members")
    X0, X1 = X[y == 0], X[y == 1]
    m0, m1 = X0.mean(axis=0), X1.mean(axis=0)
    v0 = X0.var(axis=0, ddof=1)
    v1 = X1.var(axis=0, ddof=1)
    floor = _VAR_FLOOR_REL * (X.var(axis=0, ddof=1) + _VAR_FLOOR_ABS)
    v0 = np.maximum(v0, floor)
    v1 = np.maximum(v1, floor)
    return m0, m1, v0, v1, n0, n1


def welch_t_columns(X, group) -> np.ndarray:
    """Welch t statistic (mean1 - mean0, unpooled variances) per column."""
    X = as_float_matrix(X)
    y = as_binary_labels(group, "group")
    if y.shape[0] != X.shape[0]:
        raise ValueError("group length must match row count")
    m0, m1, v0, v1, n0, n1 = _group_stats(X, y)
    return (m1 - m0) / np.sqrt(v1 / n1 + v0 / n0)


def welch_t(x, group) -> float:
    """Welch t statistic for a single variable."""
    x = np.asarray(x, dtype=np.float64)
    return float(welch_t_columns(x.reshape(-1, 1), group)[0])


def select_top(X, labels, m: int) -> FeatureRanking:
    """Rank columns by |t| and keep the m best (all columns when p < m).

    Ties break toward the lower column index.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    X = as_float_matrix(X)
    y = as_binary_labels(labels)
    check_both_classes(y, "screening input")
    stat = np.abs(welch_t_columns(X, y))
    order = np.argsort(-stat, kind="stable")
    return FeatureRanking(statistic=stat, selected=order[: min(m, X.shape[1])])
