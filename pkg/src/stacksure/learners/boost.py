"""Discrete boosting of depth-1 threshold stumps."""

from __future__ import annotations

import numpy as np

from .base import ScreenedLearner

# Weighted error is clamped into [ERR_CLAMP, 1 - ERR_CLAMP] before the
# round-weight log ratio, so a perfect stump gets a large finite weight
# instead of a division by zero.
ERR_CLAMP = 1e-10


class AdaBoostLearner(ScreenedLearner):
    """Classic discrete boosting with exhaustive decision stumps.

    Each round reweights samples and picks the stump (feature, threshold,
    polarity) with the lowest weighted error. Boosting stops early when
    the best stump is no better than chance or when it is perfect. The
    score is the weighted vote sum, an unbounded real.
    """

    kind = "adaboost"
    _decision_threshold = 0.0

    def __init__(self, rounds=100, screen_m=100, random_state=None):
        self.rounds = rounds
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        n, m = X.shape
        y_signed = np.where(y == 1, 1.0, -1.0)
        order = np.argsort(X, axis=0, kind="stable")
        sorted_vals = np.take_along_axis(X, order, axis=0)
        # threshold between positions i and i+1 is only valid for distinct values
        valid = sorted_vals[1:] > sorted_vals[:-1]

        features = []
        thresholds = []
        polarities = []
        alphas = []
        train_errors = []

        w = np.full(n, 1.0 / n)
        agg = np.zeros(n)
        for _ in range(int(self.rounds)):
            if not valid.any():
                break
            wp = np.where(y_signed > 0, w, 0.0)
            wn = w - wp
            total_n = wn.sum()
            cum_p = np.cumsum(wp[order], axis=0)[:-1]
            cum_n = np.cumsum(wn[order], axis=0)[:-1]
            # stump "x > thr predicts +1": errs = positives left + negatives right
            err_plus = cum_p + (total_n - cum_n)
            err_plus = np.where(valid, err_plus, np.inf)
            err_minus = np.where(valid, 1.0 - err_plus, np.inf)
            both = np.stack((err_plus, err_minus))
            flat = int(np.argmin(both))
            pol_idx, pos, feat = np.unravel_index(flat, both.shape)
            eps = float(both[pol_idx, pos, feat])
            if eps >= 0.5:
                break
            polarity = 1.0 if pol_idx == 0 else -1.0
            thr = 0.5 * (sorted_vals[pos, feat] + sorted_vals[pos + 1, feat])
            eps_c = min(max(eps, ERR_CLAMP), 1.0 - ERR_CLAMP)
            alpha = 0.5 * np.log((1.0 - eps_c) / eps_c)

            features.append(int(feat))
            thresholds.append(float(thr))
            polarities.append(polarity)
            alphas.append(float(alpha))

            pred = polarity * np.where(X[:, feat] > thr, 1.0, -1.0)
            agg += alpha * pred
            train_errors.append(float(np.mean(np.sign(agg) * y_signed <= 0)))
            if eps <= ERR_CLAMP:
                break
            w = w * np.exp(-alpha * y_signed * pred)
            w /= w.sum()

        self.stump_features_ = np.asarray(features, dtype=np.int64)
        self.stump_thresholds_ = np.asarray(thresholds)
        self.stump_polarities_ = np.asarray(polarities)
        self.stump_alphas_ = np.asarray(alphas)
        self.train_errors_ = np.asarray(train_errors)

    def _score(self, X):
        out = np.zeros(X.shape[0])
        for f, thr, pol, alpha in zip(
            self.stump_features_,
            self.stump_thresholds_,
            self.stump_polarities_,
            self.stump_alphas_,
        ):
            out += alpha * pol * np.where(X[:, f] > thr, 1.0, -1.0)
        return out
