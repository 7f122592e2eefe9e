"""The six base classifiers behind one fit/score surface.

Learners are ordinary estimators (init params, fit(X, y), predict_score)
and can be addressed uniformly through LearnerSpec for protocol code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from ..core import Dataset, RngStream
from .base import FitCounter, ScreenedLearner, count_base_fits
from .boost import AdaBoostLearner
from .forest import ForestCore, RandomForestLearner
from .linear import LassoLearner, LinearSVMLearner
from .simple import KNNLearner, NaiveBayesLearner
from . import _kernels

__all__ = [
    "LearnerSpec",
    "LEARNER_KINDS",
    "default_specs",
    "fit_learner",
    "score",
    "count_base_fits",
    "FitCounter",
    "ScreenedLearner",
    "RandomForestLearner",
    "LassoLearner",
    "LinearSVMLearner",
    "AdaBoostLearner",
    "NaiveBayesLearner",
    "KNNLearner",
    "ForestCore",
    "warm_up",
]

# fixed order: also the default ensemble order
LEARNER_KINDS: Mapping[str, type] = MappingProxyType(
    {
        "random_forest": RandomForestLearner,
        "lasso": LassoLearner,
        "svm": LinearSVMLearner,
        "adaboost": AdaBoostLearner,
        "naive_bayes": NaiveBayesLearner,
        "knn": KNNLearner,
    }
)

_TUNABLE = {
    "random_forest": frozenset({"n_trees", "min_leaf"}),
    "lasso": frozenset({"lam", "tol", "max_sweeps"}),
    "svm": frozenset({"C", "epochs"}),
    "adaboost": frozenset({"rounds"}),
    "naive_bayes": frozenset({"var_floor"}),
    "knn": frozenset({"k"}),
}


@dataclass(frozen=True)
class LearnerSpec:
    """A base-learner kind plus hyperparameter overrides."""

    kind: str
    hyperparams: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in LEARNER_KINDS:
            raise ValueError(
                f"unknown learner kind {self.kind!r}; expected one of {sorted(LEARNER_KINDS)}"
            )
        unknown = set(self.hyperparams) - _TUNABLE[self.kind]
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        # plain dict: specs must survive pickling into worker processes
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))

    def build(self, screen_m: int = 100, random_state=None) -> ScreenedLearner:
        cls = LEARNER_KINDS[self.kind]
        return cls(**dict(self.hyperparams), screen_m=screen_m, random_state=random_state)


def default_specs() -> list[LearnerSpec]:
    """One spec per kind, default hyperparameters, fixed order."""
    return [LearnerSpec(kind) for kind in LEARNER_KINDS]


def fit_learner(
    spec: LearnerSpec,
    train: Dataset,
    rng: RngStream,
    screen_m: int = 100,
) -> ScreenedLearner:
    """Screen, fit and return the model for one spec on one training set."""
    model = spec.build(screen_m=screen_m, random_state=rng)
    return model.fit(train.features, train.labels)


def score(model: ScreenedLearner, X) -> np.ndarray:
    """Class-1 scores of a fitted model on a feature matrix."""
    return model.predict_score(X)


def warm_up():
    """Compile the numeric kernels ahead of time (idempotent)."""
    _kernels.warm_up()
