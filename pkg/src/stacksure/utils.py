"""Input validation helpers used across estimators and protocols."""

from __future__ import annotations

import numpy as np


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return X


def as_binary_labels(y, name: str = "labels") -> np.ndarray:
    """Coerce to a 1-D int array of 0/1 values."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {y.shape}")
    out = y.astype(np.int64, copy=True)
    if not np.array_equal(out, y) or not np.all((out == 0) | (out == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return out


def as_score_vector(scores, n: int | None = None, name: str = "scores") -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally of fixed length."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    if n is not None and s.shape[0] != n:
        raise ValueError(f"{name} has length {s.shape[0]}, expected {n}")
    return s


def check_both_classes(y: np.ndarray, context: str = "input") -> None:
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ValueError(f"{context} must contain both classes")


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy, detached from the caller's buffer."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out
