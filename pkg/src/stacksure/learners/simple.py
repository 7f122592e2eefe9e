"""Nearest-neighbour and Gaussian naive Bayes scorers."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .base import ScreenedLearner


class KNNLearner(ScreenedLearner):
    """k nearest neighbours; score is the fraction of positive neighbours."""

    kind = "knn"

    def __init__(self, k=10, screen_m=100, random_state=None):
        self.k = k
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        self.train_X_ = X
        self.train_y_ = y

    def _score(self, X):
        k = min(int(self.k), self.train_X_.shape[0])
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            - 2.0 * X @ self.train_X_.T
            + np.sum(self.train_X_**2, axis=1)[None, :]
        )
        # stable sort: distance ties resolve toward the earlier training row
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return self.train_y_[nearest].mean(axis=1)


class NaiveBayesLearner(ScreenedLearner):
    """Gaussian naive Bayes; score is the posterior probability of class 1."""

    kind = "naive_bayes"

    def __init__(self, var_floor=1e-9, screen_m=100, random_state=None):
        self.var_floor = var_floor
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        self.mean_ = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
        self.var_ = np.stack(
            [np.maximum(X[y == c].var(axis=0), self.var_floor) for c in (0, 1)]
        )
        self.log_prior_ = np.log(np.array([np.mean(y == 0), np.mean(y == 1)]))

    def _score(self, X):
        log_joint = np.empty((X.shape[0], 2))
        for c in (0, 1):
            z = (X - self.mean_[c]) ** 2 / self.var_[c]
            log_joint[:, c] = self.log_prior_[c] - 0.5 * np.sum(
                z + np.log(2.0 * np.pi * self.var_[c]), axis=1
            )
        return expit(log_joint[:, 1] - log_joint[:, 0])
