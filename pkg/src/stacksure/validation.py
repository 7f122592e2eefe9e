"""Ensemble training and the five generalization-performance estimators.

Protocols canonicalize row order at entry (sort by label, then a content
digest) and derive every random decision from named sub-streams, so any
estimate depends only on dataset content and the master seed: row order,
execution order and worker count cannot change a single bit.

Estimator cost profile, in base-learner fits on a length-n dataset with
L learners: one level-one build costs L*k fits; the training-set,
independent-CV and bootstrap estimators all reuse one build and add no
base fits of their own; nested cross validation costs
L*k_outer*(k_inner+1) fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .combiners import COMBINER_METHODS, LevelOneData, apply_combiner, fit_combiner
from .core import Dataset, RngStream, auc, canonical_order, split_folds
from .errors import OracleUnavailableError, UndefinedAUCError
from .learners import LearnerSpec, ScreenedLearner, default_specs, fit_learner
from .synth import GaussianClassParams, sample_dataset
from .utils import as_float_matrix

__all__ = [
    "ESTIMATOR_NAMES",
    "ProtocolConfig",
    "EvaluationRecord",
    "NestedCvResult",
    "BbcEstimate",
    "SuperLearner",
    "cv_predictions",
    "build_level_one",
    "super_learn",
    "nested_cv",
    "nested_cv_multi",
    "bbc_sl",
    "bbc_sl_multi",
    "independent_cv_estimate",
    "training_set_estimate",
    "new_data_estimate",
    "new_data_multi",
]

# record label values; new_data expands into the two training fractions
ESTIMATOR_NAMES = (
    "training_set",
    "independent_cv",
    "bbc_sl",
    "nested_cv",
    "new_data_100",
    "new_data_90",
)


@dataclass(frozen=True)
class ProtocolConfig:
    """Shared protocol knobs: fold counts, bootstrap repeats, screening size."""

    k_outer: int = 10
    k_inner: int = 10
    n_boot: int = 100
    feature_m: int = 100
    stratified: bool = True
    bbc_pooled: bool = False
    combiners: tuple[str, ...] = COMBINER_METHODS
    learners: tuple[LearnerSpec, ...] = field(default_factory=lambda: tuple(default_specs()))

    def __post_init__(self):
        if self.k_outer < 2 or self.k_inner < 2:
            raise ValueError("fold counts must be at least 2")
        if self.n_boot < 1:
            raise ValueError("n_boot must be at least 1")
        if self.feature_m < 1:
            raise ValueError("feature_m must be at least 1")
        object.__setattr__(self, "combiners", tuple(self.combiners))
        object.__setattr__(self, "learners", tuple(self.learners))
        unknown = set(self.combiners) - set(COMBINER_METHODS)
        if unknown:
            raise ValueError(f"unknown combiner methods: {sorted(unknown)}")


@dataclass(frozen=True)
class EvaluationRecord:
    """One AUC measurement: (estimator, combiner, repeat) plus provenance."""

    estimator: str
    combiner: str
    auc: float
    repeat_index: int
    seed: int
    wall_time_ms: int
    undefined: bool = False

    def __post_init__(self):
        if self.estimator not in ESTIMATOR_NAMES:
            raise ValueError(f"unknown estimator label {self.estimator!r}")
        if not self.undefined and not 0.0 <= self.auc <= 1.0:
            raise ValueError("auc must lie in [0, 1] unless flagged undefined")


def _canonicalize(D: Dataset) -> tuple[Dataset, np.ndarray]:
    perm = canonical_order(D.features, D.labels)
    return D.subset(perm), perm


def _canonicalize_level_one(L1: LevelOneData) -> tuple[LevelOneData, np.ndarray]:
    perm = canonical_order(L1.Z, L1.labels)
    return L1.subset(perm), perm


def cv_predictions(
    spec: LearnerSpec,
    D: Dataset,
    k: int,
    rng: RngStream,
    screen_m: int = 100,
    stratified: bool = True,
) -> np.ndarray:
    """Out-of-fold scores: each row is scored by the model that never saw it.

    Screening is re-run inside every fold. The returned vector is aligned
    to the rows of D.
    """
    D_c, perm = _canonicalize(D)
    folds = split_folds(D_c.n, D_c.labels, k, stratified, rng.child("split"))
    scores_c = np.empty(D_c.n)
    for i in range(k):
        train_idx = folds.train_indices(i)
        test_idx = folds.test_indices(i)
        model = fit_learner(spec, D_c.subset(train_idx), rng.child("fold", i), screen_m)
        scores_c[test_idx] = model.predict_score(D_c.features[test_idx])
    out = np.empty(D.n)
    out[perm] = scores_c
    return out


def _spec_label(spec: LearnerSpec) -> str:
    """Content-derived rng label: identical specs share identical streams."""
    params = ",".join(f"{k}={spec.hyperparams[k]!r}" for k in sorted(spec.hyperparams))
    return f"{spec.kind}({params})"


def build_level_one(
    specs,
    D: Dataset,
    k: int,
    rng: RngStream,
    screen_m: int = 100,
    stratified: bool = True,
) -> LevelOneData:
    """Cross-validated scores for every learner, over one shared split.

    Sharing the fold assignment keeps the columns jointly comparable for
    the combiner. Per-learner streams are derived from spec content, so
    two identical specs produce two identical columns. Row order of the
    result is the canonical order of D.
    """
    specs = list(specs)
    D_c, _ = _canonicalize(D)
    folds = split_folds(D_c.n, D_c.labels, k, stratified, rng.child("split"))
    Z = np.empty((D_c.n, len(specs)))
    for l, spec in enumerate(specs):
        for i in range(k):
            train_idx = folds.train_indices(i)
            test_idx = folds.test_indices(i)
            model = fit_learner(
                spec, D_c.subset(train_idx), rng.child("fit", _spec_label(spec), i), screen_m
            )
            Z[test_idx, l] = model.predict_score(D_c.features[test_idx])
    return LevelOneData(Z=Z, labels=D_c.labels, learner_names=tuple(s.kind for s in specs))


def _fit_full_models(specs, D_c: Dataset, rng: RngStream, screen_m: int) -> list[ScreenedLearner]:
    return [
        fit_learner(spec, D_c, rng.child("refit", _spec_label(spec)), screen_m) for spec in specs
    ]


def _super_learn_multi(
    specs,
    methods,
    D: Dataset,
    X_new,
    rng: RngStream,
    k: int,
    screen_m: int,
    stratified: bool,
):
    """Shared-core super learning for several combiner methods at once.

    The level-one build and the full-data refits do not depend on the
    combiner, so they are computed once.
    """
    specs = list(specs)
    X_new = as_float_matrix(X_new, "X_new")
    D_c, _ = _canonicalize(D)
    L1 = build_level_one(specs, D_c, k, rng.child("level1"), screen_m, stratified)
    full_models = _fit_full_models(specs, D_c, rng.child("full"), screen_m)
    Z_new = np.column_stack([m.predict_score(X_new) for m in full_models])
    combiner_models = {
        method: fit_combiner(method, L1, rng.child("combine", method)) for method in methods
    }
    scores = {method: apply_combiner(model, Z_new) for method, model in combiner_models.items()}
    return scores, combiner_models, full_models, L1


class SuperLearner(BaseEstimator):
    """Stacked ensemble: base learners plus one combining rule.

    fit(D) cross-validates the base learners on D, fits the combiner on
    the out-of-fold scores, then refits every base learner on all of D;
    predict_score applies the refit learners and the combiner to new rows.
    """

    def __init__(
        self,
        specs=None,
        combiner: str = "nnls",
        k: int = 10,
        screen_m: int = 100,
        stratified: bool = True,
        random_state=None,
    ):
        self.specs = specs
        self.combiner = combiner
        self.k = k
        self.screen_m = screen_m
        self.stratified = stratified
        self.random_state = random_state

    def _rng(self) -> RngStream:
        rs = self.random_state
        if isinstance(rs, RngStream):
            return rs
        return RngStream(0 if rs is None else int(rs))

    def fit(self, X, y=None) -> "SuperLearner":
        D = X if isinstance(X, Dataset) else Dataset(features=X, labels=y)
        specs = list(self.specs) if self.specs is not None else default_specs()
        rng = self._rng()
        D_c, _ = _canonicalize(D)
        self.level_one_ = build_level_one(
            specs, D_c, self.k, rng.child("level1"), self.screen_m, self.stratified
        )
        self.base_models_ = _fit_full_models(specs, D_c, rng.child("full"), self.screen_m)
        self.combiner_model_ = fit_combiner(
            self.combiner, self.level_one_, rng.child("combine", self.combiner)
        )
        return self

    def predict_score(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        Z = np.column_stack([m.predict_score(X) for m in self.base_models_])
        return apply_combiner(self.combiner_model_, Z)

    def predict(self, X) -> np.ndarray:
        return (self.predict_score(X) >= 0.5).astype(np.int64)


def super_learn(
    specs,
    combiner: str,
    D: Dataset,
    D_new: Dataset,
    rng: RngStream,
    k: int = 10,
    screen_m: int = 100,
    stratified: bool = True,
) -> tuple[SuperLearner, np.ndarray]:
    """Train a stacked ensemble on D and score the rows of D_new."""
    model = SuperLearner(
        specs=list(specs),
        combiner=combiner,
        k=k,
        screen_m=screen_m,
        stratified=stratified,
        random_state=rng,
    ).fit(D)
    return model, model.predict_score(D_new.features)


@dataclass(frozen=True)
class NestedCvResult:
    """Out-of-fold ensemble scores (aligned to the input rows) and their AUC."""

    scores: np.ndarray
    auc: float


def nested_cv_multi(specs, methods, D: Dataset, cfg: ProtocolConfig, rng: RngStream):
    """Nested cross validation for several combiners over shared base fits."""
    methods = list(methods)
    D_c, perm = _canonicalize(D)
    # same stream label as cv_predictions: with a single learner and the
    # best-single combiner, nested CV collapses to plain CV over this split
    folds = split_folds(D_c.n, D_c.labels, cfg.k_outer, cfg.stratified, rng.child("split"))
    collected = {m: np.empty(D_c.n) for m in methods}
    for i in range(cfg.k_outer):
        train_idx = folds.train_indices(i)
        test_idx = folds.test_indices(i)
        scores, _, _, _ = _super_learn_multi(
            specs,
            methods,
            D_c.subset(train_idx),
            D_c.features[test_idx],
            rng.child("outer", i),
            cfg.k_inner,
            cfg.feature_m,
            cfg.stratified,
        )
        for m in methods:
            collected[m][test_idx] = scores[m]
    out = {}
    for m in methods:
        aligned = np.empty(D.n)
        aligned[perm] = collected[m]
        out[m] = NestedCvResult(scores=aligned, auc=auc(collected[m], D_c.labels))
    return out


def nested_cv(
    specs, combiner: str, D: Dataset, cfg: ProtocolConfig, rng: RngStream
) -> NestedCvResult:
    """Outer k-fold loop running the full super-learning procedure per fold."""
    return nested_cv_multi(specs, [combiner], D, cfg, rng)[combiner]


@dataclass(frozen=True)
class BbcEstimate:
    """Bootstrap estimate: per-iteration out-of-bag AUCs and their mean.

    pooled_auc scores all out-of-bag predictions jointly instead of
    averaging per-iteration values. n_skipped counts iterations whose bag
    or out-of-bag set contained a single class.
    """

    iteration_aucs: np.ndarray
    auc: float
    pooled_auc: float
    n_skipped: int
    oob_index_sets: tuple[np.ndarray, ...]


def bbc_sl_multi(
    L1: LevelOneData, methods, n_boot: int, rng: RngStream
) -> dict[str, BbcEstimate]:
    """Bootstrap-corrected combiner validation for several methods at once.

    Each iteration refits only the combiners (never a base learner) on a
    with-replacement row sample of the level-one data and scores the rows
    the sample missed. Bag draws are shared across methods.
    """
    methods = list(methods)
    if n_boot < 1:
        raise ValueError("n_boot must be at least 1")
    L1_c, perm = _canonicalize_level_one(L1)
    n = L1_c.n
    per_method_aucs = {m: [] for m in methods}
    pooled_scores = {m: [] for m in methods}
    pooled_labels = []
    oob_sets = []
    n_skipped = 0
    for b in range(n_boot):
        stream = rng.child("boot", b)
        bag = stream.generator().integers(0, n, size=n)
        oob_mask = np.ones(n, dtype=bool)
        oob_mask[bag] = False
        oob = np.flatnonzero(oob_mask)
        bag_labels = L1_c.labels[bag]
        if oob.size == 0 or len(set(L1_c.labels[oob])) < 2 or len(set(bag_labels)) < 2:
            n_skipped += 1
            continue
        bag_data = L1_c.subset(bag)
        oob_Z = L1_c.Z[oob]
        oob_y = L1_c.labels[oob]
        pooled_labels.append(oob_y)
        oob_sets.append(perm[oob])
        for m in methods:
            model = fit_combiner(m, bag_data, stream.child("fit", m))
            preds = apply_combiner(model, oob_Z)
            per_method_aucs[m].append(auc(preds, oob_y))
            pooled_scores[m].append(preds)
    if not oob_sets:
        raise UndefinedAUCError(
            "every bootstrap iteration was skipped: out-of-bag sets never held both classes"
        )
    labels_cat = np.concatenate(pooled_labels)
    out = {}
    for m in methods:
        aucs = np.asarray(per_method_aucs[m])
        out[m] = BbcEstimate(
            iteration_aucs=aucs,
            auc=float(aucs.mean()),
            pooled_auc=auc(np.concatenate(pooled_scores[m]), labels_cat),
            n_skipped=n_skipped,
            oob_index_sets=tuple(oob_sets),
        )
    return out


def bbc_sl(L1: LevelOneData, combiner: str, n_boot: int, rng: RngStream) -> BbcEstimate:
    """Bootstrap bias-corrected estimate for one combiner."""
    return bbc_sl_multi(L1, [combiner], n_boot, rng)[combiner]


def independent_cv_estimate(
    L1: LevelOneData,
    combiner: str,
    k: int,
    rng: RngStream,
    stratified: bool = True,
) -> float:
    """Cross-validate only the combiner over the rows of fixed level-one data."""
    L1_c, _ = _canonicalize_level_one(L1)
    folds = split_folds(L1_c.n, L1_c.labels, k, stratified, rng.child("split"))
    scores = np.empty(L1_c.n)
    for i in range(k):
        train_idx = folds.train_indices(i)
        test_idx = folds.test_indices(i)
        model = fit_combiner(combiner, L1_c.subset(train_idx), rng.child("fold", i))
        scores[test_idx] = apply_combiner(model, L1_c.Z[test_idx])
    return auc(scores, L1_c.labels)


def training_set_estimate(L1: LevelOneData, combiner: str, rng: RngStream) -> float:
    """Fit the combiner on all level-one rows and score those same rows."""
    L1_c, _ = _canonicalize_level_one(L1)
    model = fit_combiner(combiner, L1_c, rng.child("fit"))
    return auc(apply_combiner(model, L1_c.Z), L1_c.labels)


def _stratified_subsample(D_c: Dataset, fraction: float, rng: RngStream) -> Dataset:
    if not 0.0 < fraction <= 1.0:
        raise ValueError("train_fraction must lie in (0, 1]")
    if fraction == 1.0:
        return D_c
    gen = rng.generator()
    keep = []
    for cls in (0, 1):
        members = np.flatnonzero(D_c.labels == cls)
        n_keep = max(1, int(round(fraction * members.size)))
        keep.append(members[np.sort(gen.permutation(members.size)[:n_keep])])
    return D_c.subset(np.sort(np.concatenate(keep)))


def new_data_multi(
    specs,
    methods,
    D_train: Dataset,
    params: GaussianClassParams | None,
    n_new: int,
    train_fraction: float,
    rng: RngStream,
    k: int = 10,
    screen_m: int = 100,
    stratified: bool = True,
) -> dict[str, float]:
    """New-data oracle for several combiners over shared base fits."""
    if params is None:
        raise OracleUnavailableError(
            "oracle unavailable: new-data evaluation needs the generating parameters"
        )
    D_c, _ = _canonicalize(D_train)
    train = _stratified_subsample(D_c, train_fraction, rng.child("subsample"))
    D_new = sample_dataset(params, n_new, rng.child("newdata"))
    scores, _, _, _ = _super_learn_multi(
        specs, list(methods), train, D_new.features, rng.child("superlearn"), k, screen_m, stratified
    )
    return {m: auc(scores[m], D_new.labels) for m in scores}


def new_data_estimate(
    specs,
    combiner: str,
    D_train: Dataset,
    params: GaussianClassParams | None,
    n_new: int,
    train_fraction: float,
    rng: RngStream,
    k: int = 10,
    screen_m: int = 100,
    stratified: bool = True,
) -> float:
    """Oracle estimate: train on (a fraction of) D_train, score fresh data.

    Only available when the generating parameters are known, i.e. for
    synthetic datasets.
    """
    return new_data_multi(
        specs, [combiner], D_train, params, n_new, train_fraction, rng, k, screen_m, stratified
    )[combiner]
