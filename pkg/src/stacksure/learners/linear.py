"""Linear scorers: lasso-penalized least squares and a hinge-loss SVM."""

from __future__ import annotations

import numpy as np

from ._kernels import lasso_cd, svm_subgradient
from .base import ScreenedLearner


class LassoLearner(ScreenedLearner):
    """L1-penalized least squares on 0/1 labels via coordinate descent.

    Scores feed a ranking metric, so a squared-error fit is enough; no
    logistic link. lam=None picks lam_max/20, where lam_max is the
    smallest penalty that zeroes every coefficient.
    """

    kind = "lasso"

    def __init__(self, lam=None, tol=1e-7, max_sweeps=10000, screen_m=100, random_state=None):
        self.lam = lam
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        yf = y.astype(np.float64)
        self.x_mean_ = X.mean(axis=0)
        xc = X - self.x_mean_
        self.y_mean_ = yf.mean()
        yc = yf - self.y_mean_
        q = xc.T @ yc
        lam = self.lam
        if lam is None:
            lam = 2.0 * np.abs(q).max() / 20.0
        self.lam_ = float(lam)
        G = np.ascontiguousarray(xc.T @ xc)
        beta, sweeps, converged = lasso_cd(G, q, self.lam_ / 2.0, self.tol, self.max_sweeps)
        self.coef_ = beta
        self.intercept_ = self.y_mean_ - self.x_mean_ @ beta
        self.n_sweeps_ = int(sweeps)
        self.converged_ = bool(converged)

    def _score(self, X):
        return X @ self.coef_ + self.intercept_


class LinearSVMLearner(ScreenedLearner):
    """Soft-margin linear SVM on standardized features.

    Trained by decreasing-step subgradient descent over a fixed number of
    epochs; the per-epoch sample order is drawn from the seeded stream, so
    training is fully reproducible. The score is the signed margin.
    """

    kind = "svm"
    _decision_threshold = 0.0

    def __init__(self, C=1.0, epochs=200, screen_m=100, random_state=None):
        self.C = C
        self.epochs = epochs
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        if self.C <= 0:
            raise ValueError("C must be positive")
        self.x_mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.x_scale_ = np.where(sd > 1e-12, sd, 1.0)
        xs = (X - self.x_mean_) / self.x_scale_
        y_signed = np.where(y == 1, 1.0, -1.0)
        lam = 1.0 / (self.C * X.shape[0])
        seed = np.uint64(rng.child("svm").token())
        w, b = svm_subgradient(np.ascontiguousarray(xs), y_signed, int(self.epochs), lam, seed)
        self.coef_ = w
        self.intercept_ = float(b)

    def _score(self, X):
        xs = (X - self.x_mean_) / self.x_scale_
        return xs @ self.coef_ + self.intercept_
