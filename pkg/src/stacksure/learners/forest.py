"""Bagged CART forest over Gini-split trees."""

from __future__ import annotations

import math

import numpy as np

from ._kernels import build_forest, forest_scores
from .base import ScreenedLearner
from ..core import RngStream


class ForestCore:
    """A fitted forest without screening, reusable as a combining model."""

    def __init__(self, n_trees=100, min_leaf=2):
        self.n_trees = int(n_trees)
        self.min_leaf = int(min_leaf)

    def fit(self, X, y, rng: RngStream):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n_cand = max(1, int(math.isqrt(X.shape[1])))
        seed = np.uint64(rng.child("forest").token())
        (
            self.feat_,
            self.thr_,
            self.left_,
            self.right_,
            self.vote_,
            self.n_nodes_,
        ) = build_forest(X, y, self.n_trees, self.min_leaf, n_cand, seed)
        return self

    def scores(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return forest_scores(self.feat_, self.thr_, self.left_, self.right_, self.vote_, X)


class RandomForestLearner(ScreenedLearner):
    """Bootstrap forest of purity-grown Gini trees (leaves of at least 2).

    Each node draws sqrt(m) candidate features. The score is the fraction
    of trees voting class 1, so it moves in steps of 1/n_trees.
    """

    kind = "random_forest"

    def __init__(self, n_trees=100, min_leaf=2, screen_m=100, random_state=None):
        self.n_trees = n_trees
        self.min_leaf = min_leaf
        self.screen_m = screen_m
        self.random_state = random_state

    def _fit(self, X, y, rng):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        self.core_ = ForestCore(self.n_trees, self.min_leaf).fit(X, y, rng)

    def _score(self, X):
        return self.core_.scores(X)
