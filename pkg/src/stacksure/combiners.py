"""Combining rules: map L base-learner score columns to one ensemble score.

Six methods share one surface: fit on level-one data (out-of-fold base
scores plus labels), then apply to any matrix with the same columns.
All of them except the forest reduce to non-negative column weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .core import RngStream, auc
from .errors import IterationCapError
from .learners import ForestCore
from .utils import as_binary_labels, as_float_matrix, check_both_classes, frozen

__all__ = [
    "COMBINER_METHODS",
    "LevelOneData",
    "CombinerModel",
    "nnls_solve",
    "nnlog_solve",
    "fit_combiner",
    "apply_combiner",
]

COMBINER_METHODS = ("nnls", "nnlog", "mean", "best1", "bestk", "rf")


@dataclass(frozen=True)
class LevelOneData:
    """Out-of-fold base scores (n rows by L learners) with the true labels."""

    Z: np.ndarray
    labels: np.ndarray
    learner_names: tuple[str, ...]

    def __post_init__(self):
        Z = as_float_matrix(self.Z, "Z")
        y = as_binary_labels(self.labels)
        names = tuple(self.learner_names)
        if Z.shape[0] != y.shape[0]:
            raise ValueError("Z and labels disagree on the number of rows")
        if Z.shape[1] != len(names):
            raise ValueError("learner_names length must match the column count")
        object.__setattr__(self, "Z", frozen(Z))
        object.__setattr__(self, "labels", frozen(y))
        object.__setattr__(self, "learner_names", names)

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def n_learners(self) -> int:
        return self.Z.shape[1]

    def subset(self, rows) -> "LevelOneData":
        rows = np.asarray(rows)
        return LevelOneData(self.Z[rows], self.labels[rows], self.learner_names)


def nnls_solve(Z, y, tol_scale: float = 1e-8) -> np.ndarray:
    """Least squares with non-negative weights, by active-set iteration.

    Minimizes ||y - Z w||^2 over w >= 0. Converged solutions satisfy the
    stationarity conditions to within tol_scale relative to the problem
    scale. The active-set loop provably terminates; the generous cap only
    guards against numerically degenerate cycling, and hitting it raises
    IterationCapError.
    """
    Z = as_float_matrix(Z, "Z")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != Z.shape[0]:
        raise ValueError("y must be a vector matching Z's row count")
    n, L = Z.shape
    scale = max(1.0, float(np.abs(Z.T @ y).max()))
    tol = tol_scale * scale
    w = np.zeros(L)
    passive = np.zeros(L, dtype=bool)
    max_outer = max(10 * L, 30)
    for _ in range(max_outer):
        grad = Z.T @ (y - Z @ w)  # = -grad(f)/2: positive entries improve fit
        candidates = np.where(~passive, grad, -np.inf)
        j = int(np.argmax(candidates))
        if candidates[j] <= tol:
            return w
        passive[j] = True
        for _ in range(L + 1):
            z = np.zeros(L)
            z[passive] = np.linalg.lstsq(Z[:, passive], y, rcond=None)[0]
            if z[passive].min() > 0.0:
                w = z
                break
            # step toward the subproblem solution until a weight hits zero,
            # then retire every weight that reached the boundary
            mask = passive & (z <= 0.0)
            denom = w[mask] - z[mask]
            ratios = np.where(denom > 0.0, w[mask] / np.where(denom > 0.0, denom, 1.0), 0.0)
            alpha = float(ratios.min())
            w = w + alpha * (z - w)
            at_zero = np.zeros(L, dtype=bool)
            at_zero[np.flatnonzero(mask)[ratios <= alpha * (1.0 + 1e-12)]] = True
            w[at_zero] = 0.0
            passive &= ~at_zero
            w[~passive] = 0.0
        else:
            raise IterationCapError(
                "non-negative least squares inner loop failed to settle", weights=w
            )
    raise IterationCapError("non-negative least squares hit its iteration cap", weights=w)


def nnlog_solve(
    Z,
    y,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> tuple[np.ndarray, float]:
    """Logistic regression with non-negative slopes and a free intercept.

    Projected gradient descent with backtracking on the mean negative
    log-likelihood. Converges when the projected gradient infinity norm
    drops below tol; otherwise raises IterationCapError carrying the last
    iterate (expected under perfect separation, where the optimum is at
    infinity).
    """
    Z = as_float_matrix(Z, "Z")
    y = as_binary_labels(y)
    check_both_classes(y, "logistic combiner input")
    n, L = Z.shape
    yf = y.astype(np.float64)

    def nll(w, b):
        eta = Z @ w + b
        # log(1 + exp(eta)) - y*eta, stabilized
        return float(np.mean(np.logaddexp(0.0, eta) - yf * eta))

    w = np.zeros(L)
    b = float(np.log(yf.mean() / (1.0 - yf.mean())))
    f = nll(w, b)
    step = 1.0
    for _ in range(max_iter):
        p = expit(Z @ w + b)
        grad_w = Z.T @ (p - yf) / n
        grad_b = float(np.mean(p - yf))
        projected = np.where((w > 0.0) | (grad_w < 0.0), grad_w, 0.0)
        if max(np.abs(projected).max(), abs(grad_b)) < tol:
            return w, b
        step = min(step * 2.0, 1e8)
        while True:
            w_new = np.maximum(w - step * grad_w, 0.0)
            b_new = b - step * grad_b
            f_new = nll(w_new, b_new)
            decrease = grad_w @ (w - w_new) + grad_b * (b - b_new)
            if f_new <= f - 0.5 * decrease + 1e-15 or step < 1e-14:
                break
            step *= 0.5
        w, b, f = w_new, b_new, f_new
    raise IterationCapError(
        "non-negative logistic solver hit its iteration cap", weights=w, intercept=b
    )


def _column_aucs(L1: LevelOneData) -> np.ndarray:
    return np.array([auc(L1.Z[:, j], L1.labels) for j in range(L1.n_learners)])


@dataclass(frozen=True)
class CombinerModel:
    """A fitted combining rule.

    Weighted methods store non-negative column weights (plus an intercept
    for the logistic one); selection methods also record the chosen
    columns; the forest method stores the fitted forest. Flags record
    fallback or capped fits for report provenance.
    """

    method: str
    weights: np.ndarray | None = None
    intercept: float | None = None
    chosen: tuple[int, ...] | None = None
    forest: ForestCore | None = None
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.method not in COMBINER_METHODS:
            raise ValueError(f"unknown combiner method {self.method!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.ndim != 1 or np.any(w < 0.0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be a finite non-negative vector")
            object.__setattr__(self, "weights", frozen(w))

    def weight_summary(self) -> dict:
        """Raw and sum-normalized weights for report serialization."""
        out = {"method": self.method, "flags": list(self.flags)}
        if self.weights is not None:
            total = float(self.weights.sum())
            out["weights"] = [float(v) for v in self.weights]
            out["weights_normalized"] = (
                [float(v) / total for v in self.weights] if total > 0 else None
            )
        if self.intercept is not None:
            out["intercept"] = float(self.intercept)
        if self.chosen is not None:
            out["chosen"] = list(self.chosen)
        return out


def fit_combiner(method: str, L1: LevelOneData, rng: RngStream | None = None) -> CombinerModel:
    """Fit one combining rule on level-one data."""
    if method not in COMBINER_METHODS:
        raise ValueError(f"unknown combiner method {method!r}; expected one of {COMBINER_METHODS}")
    L = L1.n_learners
    if method == "mean":
        return CombinerModel(method, weights=np.full(L, 1.0 / L))
    if method == "best1":
        col_auc = _column_aucs(L1)
        j = int(np.argmax(col_auc))
        w = np.zeros(L)
        w[j] = 1.0
        return CombinerModel(method, weights=w, chosen=(j,))
    if method == "bestk":
        col_auc = _column_aucs(L1)
        ranked = np.argsort(-col_auc, kind="stable")
        best_k, best_score = 1, -np.inf
        for k in range(1, L + 1):
            mean_scores = L1.Z[:, ranked[:k]].mean(axis=1)
            score = auc(mean_scores, L1.labels)
            if score > best_score:
                best_k, best_score = k, score
        chosen = tuple(int(j) for j in ranked[:best_k])
        w = np.zeros(L)
        w[list(chosen)] = 1.0 / best_k
        return CombinerModel(method, weights=w, chosen=chosen)
    if method == "nnls":
        w = nnls_solve(L1.Z, L1.labels.astype(np.float64))
        if np.all(w == 0.0):
            # all-zero weights would produce a constant score; average instead
            return CombinerModel(method, weights=np.full(L, 1.0 / L), flags=("fallback_mean",))
        return CombinerModel(method, weights=w)
    if method == "nnlog":
        try:
            w, b = nnlog_solve(L1.Z, L1.labels)
            return CombinerModel(method, weights=w, intercept=b)
        except IterationCapError as exc:
            return CombinerModel(
                method, weights=exc.weights, intercept=exc.intercept, flags=("capped",)
            )
    # method == "rf"
    if rng is None:
        rng = RngStream(0)
    forest = ForestCore().fit(L1.Z, L1.labels, rng)
    return CombinerModel(method, forest=forest)


def apply_combiner(model: CombinerModel, Z_new) -> np.ndarray:
    """Ensemble scores for new base-score rows."""
    Z_new = as_float_matrix(Z_new, "Z_new")
    if model.method == "rf":
        return model.forest.scores(Z_new)
    if Z_new.shape[1] != model.weights.shape[0]:
        raise ValueError(
            f"Z_new has {Z_new.shape[1]} columns, the model expects {model.weights.shape[0]}"
        )
    linear = Z_new @ model.weights
    if model.method == "nnlog":
        return expit(linear + model.intercept)
    return linear
