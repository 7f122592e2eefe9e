"""stacksure: stacked binary classifiers with honest performance estimates.

Builds ensembles of six base learners under six combining rules and
estimates their generalization AUC five ways, from the optimistic
training-set measure to nested cross validation and a bootstrap
out-of-bag correction that costs no extra base-learner fits.
"""

from ._version import __version__
from .core import Dataset, FoldAssignment, RngStream, SummaryStat, auc, split_folds, summarize
from .combiners import CombinerModel, LevelOneData, apply_combiner, fit_combiner
from .learners import LearnerSpec, default_specs, fit_learner
from .screening import FeatureRanking, select_top, welch_t
from .synth import GaussianClassParams, GeneratorConfig, generate_params, sample_dataset
from .validation import (
    ProtocolConfig,
    EvaluationRecord,
    SuperLearner,
    bbc_sl,
    build_level_one,
    cv_predictions,
    independent_cv_estimate,
    nested_cv,
    new_data_estimate,
    super_learn,
    training_set_estimate,
)

__all__ = [
    "__version__",
    "Dataset",
    "FoldAssignment",
    "RngStream",
    "SummaryStat",
    "auc",
    "split_folds",
    "summarize",
    "CombinerModel",
    "LevelOneData",
    "apply_combiner",
    "fit_combiner",
    "LearnerSpec",
    "default_specs",
    "fit_learner",
    "FeatureRanking",
    "select_top",
    "welch_t",
    "GaussianClassParams",
    "GeneratorConfig",
    "generate_params",
    "sample_dataset",
    "ProtocolConfig",
    "EvaluationRecord",
    "SuperLearner",
    "bbc_sl",
    "build_level_one",
    "cv_predictions",
    "independent_cv_estimate",
    "nested_cv",
    "new_data_estimate",
    "super_learn",
    "training_set_estimate",
]
