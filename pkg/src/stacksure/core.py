"""Shared data model: datasets, seeded RNG streams, fold splits and metrics.

Score vectors are plain 1-D float64 arrays throughout the package (higher
score means stronger evidence for class 1).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedAUCError
from .utils import as_binary_labels, as_float_matrix, as_score_vector, frozen

__all__ = [
    "Dataset",
    "FoldAssignment",
    "RngStream",
    "SummaryStat",
    "auc",
    "summarize",
    "split_folds",
    "canonical_order",
]


@dataclass(frozen=True)
class Dataset:
    """A feature matrix with binary labels.

    Rows are observations. Arrays are copied and made read-only so datasets
    can be shared freely across concurrent tasks.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = as_float_matrix(self.features, "features")
        y = as_binary_labels(self.labels)
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"features has {X.shape[0]} rows but labels has length {y.shape[0]}"
            )
        if X.shape[0] < 2:
            raise ValueError("a dataset needs at least 2 observations")
        if X.shape[1] < 1:
            raise ValueError("a dataset needs at least 1 feature column")
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != X.shape[1]:
                raise ValueError("feature_names length does not match column count")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", frozen(X))
        object.__setattr__(self, "labels", frozen(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)


@dataclass(frozen=True)
class FoldAssignment:
    """Maps each of n observations to one of k folds."""

    fold_of: np.ndarray
    k: int

    def __post_init__(self):
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if fold_of.ndim != 1:
            raise ValueError("fold_of must be 1-dimensional")
        counts = np.bincount(fold_of, minlength=self.k)
        if fold_of.min(initial=0) < 0 or fold_of.max(initial=0) >= self.k:
            raise ValueError("fold indices must lie in [0, k)")
        if np.any(counts == 0):
            raise ValueError("every fold index in [0, k) must appear")
        if counts.max() - counts.min() > 1:
            raise ValueError("fold sizes may differ by at most 1")
        object.__setattr__(self, "fold_of", frozen(fold_of))

    @property
    def n(self) -> int:
        return self.fold_of.shape[0]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def _label_to_int(label) -> int:
    """Stable 64-bit encoding of a path label (int or short name)."""
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFFFFFFFFFF
    if isinstance(label, str):
        digest = hashlib.blake2s(label.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise TypeError(f"rng path labels must be int or str, got {type(label)!r}")


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Streams are addressed by (master_seed, path). Equal addresses always
    yield identical generators; distinct paths yield statistically
    independent ones. Derivation is pure, so streams can be handed to
    concurrent tasks without coordination.
    """

    master_seed: int
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & 0xFFFFFFFFFFFFFFFF)
        object.__setattr__(self, "path", tuple(_label_to_int(x) for x in self.path))

    def child(self, *labels) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(_label_to_int(x) for x in labels))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.master_seed, *self.path])))

    def token(self) -> int:
        """A stable 64-bit digest of this stream's address."""
        h = hashlib.blake2s(digest_size=8)
        for word in (self.master_seed, *self.path):
            h.update(int(word).to_bytes(8, "little"))
        return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class SummaryStat:
    """Mean with its standard error over repeated measurements."""

    mean: float
    se_of_mean: float
    count: int


def auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative.

    Ties count one half. Mathematically identical to exhaustive counting
    over all positive-negative pairs, computed via average ranks.

    Raises UndefinedAUCError when labels contain a single class.
    """
    y = as_binary_labels(labels)
    s = as_score_vector(scores, n=y.shape[0])
    n1 = int(np.sum(y == 1))
    n0 = y.shape[0] - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedAUCError("undefined AUC: labels contain a single class")
    ranks = rankdata(s, method="average")
    # Sum of positive ranks is an integer or half-integer: exact in float64.
    wins_plus_half_ties = np.sum(ranks[y == 1]) - n1 * (n1 + 1) / 2.0
    return wins_plus_half_ties / (n1 * n0)


def summarize(values) -> SummaryStat:
    """Mean and standard error of the mean (sd with n-1 denominator over sqrt(n))."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] == 0:
        raise ValueError("summarize requires a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("summarize requires finite values")
    n = v.shape[0]
    mean = float(np.mean(v))
    se = 0.0 if n == 1 else float(np.std(v, ddof=1) / np.sqrt(n))
    return SummaryStat(mean=mean, se_of_mean=se, count=n)


def _deal_counts(n_items: int, k: int, load: np.ndarray) -> np.ndarray:
    """Per-fold quota for one class, topping up the least-loaded folds first.

    Keeps the global max-min fold size gap at 1 while each class's own
    counts also differ by at most 1.
    """
    base, rem = divmod(n_items, k)
    quota = np.full(k, base, dtype=np.int64)
    if rem:
        order = np.lexsort((np.arange(k), load))  # by load, ties to lower fold
        quota[order[:rem]] += 1
    return quota


def split_folds(
    n: int,
    labels,
    k: int,
    stratified: bool = True,
    rng: RngStream | None = None,
) -> FoldAssignment:
    """Randomly assign n observations to k nearly equal folds.

    Stratified mode balances each class across folds, which keeps every
    validation fold two-class whenever each class has at least k members.
    """
    y = as_binary_labels(labels)
    if y.shape[0] != n:
        raise ValueError("labels length must equal n")
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"cannot split {n} observations into {k} folds")
    if rng is None:
        rng = RngStream(0)
    gen = rng.generator()
    fold_of = np.empty(n, dtype=np.int64)
    if stratified:
        class_counts = np.bincount(y, minlength=2)
        if class_counts.min() < k:
            raise ValueError(
                f"stratified split needs at least k={k} members per class, "
                f"got class counts {class_counts.tolist()}"
            )
        load = np.zeros(k, dtype=np.int64)
        for cls in (0, 1):
            members = np.flatnonzero(y == cls)
            members = members[gen.permutation(members.shape[0])]
            quota = _deal_counts(members.shape[0], k, load)
            fold_ids = np.repeat(np.arange(k), quota)
            fold_of[members] = fold_ids
            load += quota
    else:
        order = gen.permutation(n)
        base, rem = divmod(n, k)
        sizes = np.full(k, base, dtype=np.int64)
        sizes[:rem] += 1
        fold_of[order] = np.repeat(np.arange(k), sizes)
    return FoldAssignment(fold_of=fold_of, k=k)


def canonical_order(features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Content-derived row permutation: sort by (label, row digest).

    Protocols shuffle and split over this order, which makes every
    downstream estimate a function of dataset content and seed only,
    independent of the row order the caller happened to use.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.asarray(labels)
    digests = np.empty(X.shape[0], dtype=np.uint64)
    for i in range(X.shape[0]):
        h = hashlib.blake2s(X[i].tobytes(), digest_size=8).digest()
        digests[i] = int.from_bytes(h, "little")
    return np.lexsort((digests, y))
