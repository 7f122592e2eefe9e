"""Shared scaffolding for the base classifiers.

Every learner screens its own features at fit time and applies the stored
selection at score time, so a fitted model never reads columns outside its
own ranking. Fits are counted through a lightweight hook that cost tests
use to verify protocol complexity claims.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np
from sklearn.base import BaseEstimator

from ..core import RngStream
from ..screening import select_top
from ..utils import as_float_matrix, as_binary_labels, check_both_classes

_active_counters: list["FitCounter"] = []


class FitCounter:
    """Counts base-learner fits while registered."""

    def __init__(self):
        self.count = 0


@contextmanager
def count_base_fits():
    """Context manager yielding a FitCounter incremented on every base fit."""
    counter = FitCounter()
    _active_counters.append(counter)
    try:
        yield counter
    finally:
        _active_counters.remove(counter)


def _note_fit():
    for counter in _active_counters:
        counter.count += 1


def as_rng(random_state) -> RngStream:
    """Coerce an init-style random_state into a stream (None pins seed 0)."""
    if random_state is None:
        return RngStream(0)
    if isinstance(random_state, RngStream):
        return random_state
    if isinstance(random_state, (int, np.integer)):
        return RngStream(int(random_state))
    raise TypeError("random_state must be None, an int or an RngStream")


class ScreenedLearner(BaseEstimator):
    """Base class: t-statistic screening plus a kind-specific scorer.

    Subclasses implement _fit(X_screened, y, rng) and _score(X_screened),
    take all hyperparameters in __init__, and expose fitted state through
    trailing-underscore attributes, so instances clone and compose like
    any other estimator.
    """

    kind = "abstract"
    _decision_threshold = 0.5

    # set by subclass __init__
    screen_m: int
    random_state: object

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = as_binary_labels(y)
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y disagree on the number of rows")
        check_both_classes(y, "training data")
        rng = as_rng(self.random_state)
        self.n_features_in_ = X.shape[1]
        self.ranking_ = select_top(X, y, self.screen_m)
        self._fit(np.ascontiguousarray(X[:, self.ranking_.selected]), y, rng)
        _note_fit()
        return self

    def predict_score(self, X) -> np.ndarray:
        if not hasattr(self, "ranking_"):
            raise ValueError(f"this {type(self).__name__} is not fitted yet")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, the model was fitted on {self.n_features_in_}"
            )
        return self._score(np.ascontiguousarray(X[:, self.ranking_.selected]))

    # ecosystem-friendly alias
    def decision_function(self, X) -> np.ndarray:
        return self.predict_score(X)

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) >= self._decision_threshold).astype(np.int64)

    def _fit(self, X, y, rng: RngStream):
        raise NotImplementedError

    def _score(self, X) -> np.ndarray:
        raise NotImplementedError
