import numpy as np
import pytest
from sklearn.base import clone

from stacksure.core import Dataset, RngStream, auc
from stacksure.learners import (
    AdaBoostLearner,
    KNNLearner,
    LassoLearner,
    LearnerSpec,
    LinearSVMLearner,
    NaiveBayesLearner,
    RandomForestLearner,
    count_base_fits,
    default_specs,
    fit_learner,
)
from stacksure.screening import select_top

ALL_KINDS = ["random_forest", "lasso", "svm", "adaboost", "naive_bayes", "knn"]


def two_cluster_data(n_per_class=10, p=2, gap=6.0, seed=0):
    """Well-separated clusters, separable on every coordinate."""
    gen = np.random.default_rng(seed)
    X0 = gen.normal(size=(n_per_class, p)) - gap / 2
    X1 = gen.normal(size=(n_per_class, p)) + gap / 2
    X = np.vstack([X0, X1])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    perm = gen.permutation(len(y))
    return X[perm], y[perm]


def noisy_data(n=40, p=8, seed=1):
    gen = np.random.default_rng(seed)
    X = gen.normal(size=(n, p))
    y = gen.integers(0, 2, n)
    y[:2], y[-2:] = 0, 1
    return X, y


class TestSpecSurface:
    def test_default_specs_cover_all_kinds_in_order(self):
        assert [s.kind for s in default_specs()] == ALL_KINDS

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown learner kind"):
            LearnerSpec("boosted_ferns")

    def test_unknown_hyperparameter_rejected(self):
        with pytest.raises(ValueError, match="unknown hyperparameters"):
            LearnerSpec("knn", {"neighbours": 3})

    def test_hyperparams_reach_the_estimator(self):
        model = LearnerSpec("knn", {"k": 3}).build(screen_m=5)
        assert model.k == 3 and model.screen_m == 5

    def test_fit_learner_counts_fits(self):
        X, y = noisy_data()
        d = Dataset(features=X, labels=y)
        with count_base_fits() as counter:
            fit_learner(LearnerSpec("naive_bayes"), d, RngStream(0), screen_m=4)
            fit_learner(LearnerSpec("knn"), d, RngStream(0), screen_m=4)
        assert counter.count == 2

    def test_score_function_matches_method(self):
        from stacksure.learners import score

        X, y = noisy_data()
        d = Dataset(features=X, labels=y)
        model = fit_learner(LearnerSpec("naive_bayes"), d, RngStream(0), screen_m=4)
        assert np.array_equal(score(model, X), model.predict_score(X))

    def test_clone_and_get_params_round_trip(self):
        for spec in default_specs():
            model = spec.build(screen_m=7, random_state=3)
            cloned = clone(model)
            assert cloned.get_params() == model.get_params()


@pytest.mark.parametrize("kind", ALL_KINDS)
class TestCommonContracts:
    def test_deterministic_given_stream(self, kind):
        X, y = noisy_data(seed=11)
        rng = RngStream(42).child("fit")
        a = LearnerSpec(kind).build(screen_m=5, random_state=rng).fit(X, y)
        b = LearnerSpec(kind).build(screen_m=5, random_state=rng).fit(X, y)
        X_new = np.random.default_rng(5).normal(size=(15, X.shape[1]))
        assert np.array_equal(a.predict_score(X_new), b.predict_score(X_new))

    def test_single_class_rejected(self, kind):
        X = np.random.default_rng(0).normal(size=(8, 3))
        with pytest.raises(ValueError):
            LearnerSpec(kind).build(screen_m=2).fit(X, np.ones(8, dtype=int))

    def test_column_count_mismatch_rejected(self, kind):
        X, y = noisy_data()
        model = LearnerSpec(kind).build(screen_m=4).fit(X, y)
        with pytest.raises(ValueError, match="columns"):
            model.predict_score(X[:, :-1])

    def test_unselected_columns_never_matter(self, kind):
        gen = np.random.default_rng(7)
        X, y = two_cluster_data(n_per_class=12, p=6, seed=7)
        model = LearnerSpec(kind).build(screen_m=2, random_state=1).fit(X, y)
        X_new = gen.normal(size=(20, 6))
        base = model.predict_score(X_new)
        tampered = X_new.copy()
        unselected = sorted(set(range(6)) - set(model.ranking_.selected.tolist()))
        tampered[:, unselected] += gen.normal(size=(20, len(unselected))) * 100.0
        assert np.array_equal(model.predict_score(tampered), base)

    def test_training_auc_beats_chance_on_separable_data(self, kind):
        X, y = two_cluster_data(n_per_class=10, seed=3)
        model = LearnerSpec(kind).build(screen_m=2, random_state=2).fit(X, y)
        assert auc(model.predict_score(X), y) >= 0.5

    def test_screening_is_a_function_of_training_rows(self, kind):
        X, y = noisy_data(n=30, p=10, seed=13)
        train = Dataset(features=X, labels=y)
        model = fit_learner(LearnerSpec(kind), train, RngStream(1), screen_m=4)
        expected = select_top(X, y, 4)
        assert np.array_equal(model.ranking_.selected, expected.selected)

    def test_predict_is_thresholded_score(self, kind):
        X, y = two_cluster_data(n_per_class=8, seed=9)
        model = LearnerSpec(kind).build(screen_m=2, random_state=4).fit(X, y)
        scores = model.predict_score(X)
        preds = model.predict(X)
        assert set(np.unique(preds)) <= {0, 1}
        assert np.array_equal(preds, (scores >= model._decision_threshold).astype(int))


class TestKNN:
    def test_self_neighbour_returns_own_label(self):
        X, y = two_cluster_data(n_per_class=6, seed=2)
        model = KNNLearner(k=1, screen_m=2).fit(X, y)
        assert np.array_equal(model.predict_score(X), y.astype(float))

    def test_scores_are_multiples_of_one_over_k(self):
        X, y = noisy_data(n=30, seed=4)
        model = KNNLearner(k=10, screen_m=4).fit(X, y)
        scores = model.predict_score(np.random.default_rng(1).normal(size=(40, X.shape[1])))
        assert np.allclose(scores * 10, np.round(scores * 10))
        assert scores.min() >= 0.0 and scores.max() <= 1.0

    def test_k_clamped_to_training_size(self):
        X, y = noisy_data(n=8, p=3, seed=5)
        model = KNNLearner(k=50, screen_m=3).fit(X, y)
        assert np.allclose(model.predict_score(X), y.mean())


class TestNaiveBayes:
    def test_orders_points_by_cluster_proximity(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        y = np.array([0, 0, 1, 1])
        model = NaiveBayesLearner(screen_m=1).fit(X, y)
        scores = model.predict_score(np.array([[0.05], [5.0], [9.9]]))
        assert scores[0] < scores[1] < scores[2]

    def test_scores_are_posteriors(self):
        X, y = noisy_data(seed=6)
        scores = NaiveBayesLearner(screen_m=4).fit(X, y).predict_score(X)
        assert np.all((scores >= 0.0) & (scores <= 1.0))

    def test_variance_floor_keeps_scores_finite(self):
        X = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0], [0.0, 4.0]])
        y = np.array([0, 0, 1, 1])
        scores = NaiveBayesLearner(screen_m=2).fit(X, y).predict_score(X)
        assert np.all(np.isfinite(scores))


def lasso_kkt_violation(model, X, y):
    """Largest violation of the stationarity conditions of RSS + lam*|b|_1."""
    Xs = X[:, model.ranking_.selected]
    r = y - model.predict_score(X)
    grad = 2.0 * Xs.T @ r  # = -d(RSS)/d(beta)
    active = model.coef_ != 0.0
    worst = 0.0
    if active.any():
        worst = np.max(np.abs(np.abs(grad[active]) - model.lam_))
    if (~active).any():
        worst = max(worst, np.max(np.abs(grad[~active]) - model.lam_, initial=0.0))
    return worst


class TestLasso:
    def test_tiny_penalty_recovers_least_squares_slope(self):
        gen = np.random.default_rng(8)
        x = gen.normal(size=50)
        y01 = (x + 0.1 * gen.normal(size=50) > 0).astype(int)
        # regress the 0/1 label on one column; oracle is the closed form
        X = x.reshape(-1, 1)
        model = LassoLearner(lam=1e-8, screen_m=1).fit(X, y01)
        xc = x - x.mean()
        slope = float(xc @ (y01 - y01.mean()) / (xc @ xc))
        assert model.coef_[0] == pytest.approx(slope, abs=1e-3)

    def test_huge_penalty_zeroes_everything(self):
        X, y = noisy_data(seed=9)
        model = LassoLearner(lam=1e9, screen_m=4).fit(X, y)
        assert np.all(model.coef_ == 0.0)
        assert np.allclose(model.predict_score(X), y.mean())

    def test_default_penalty_is_lammax_over_20(self):
        X, y = noisy_data(seed=10)
        model = LassoLearner(screen_m=4).fit(X, y)
        Xs = X[:, model.ranking_.selected]
        xc = Xs - Xs.mean(axis=0)
        lam_max = 2.0 * np.abs(xc.T @ (y - y.mean())).max()
        assert model.lam_ == pytest.approx(lam_max / 20.0, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_kkt_conditions_hold(self, seed):
        gen = np.random.default_rng(seed)
        n, p = 30, 6
        X = gen.normal(size=(n, p))
        y = (X[:, 0] - 0.5 * X[:, 1] + gen.normal(size=n) > 0).astype(int)
        model = LassoLearner(screen_m=p).fit(X, y)
        assert lasso_kkt_violation(model, X, y) < 1e-5


class TestSVM:
    def test_score_of_centered_point_is_intercept(self):
        X, y = noisy_data(seed=12)
        model = LinearSVMLearner(screen_m=4).fit(X, y)
        center = X.mean(axis=0, keepdims=True)
        assert model.predict_score(center)[0] == pytest.approx(model.intercept_, abs=1e-9)

    def test_separates_clustered_data(self):
        X, y = two_cluster_data(n_per_class=15, seed=13)
        model = LinearSVMLearner(screen_m=2, random_state=7).fit(X, y)
        assert auc(model.predict_score(X), y) == 1.0

    def test_epoch_count_changes_model(self):
        X, y = noisy_data(seed=14)
        a = LinearSVMLearner(epochs=1, screen_m=4, random_state=1).fit(X, y)
        b = LinearSVMLearner(epochs=200, screen_m=4, random_state=1).fit(X, y)
        assert not np.allclose(a.coef_, b.coef_)


def separable_stump_instance(seed, n=24, p=5):
    """One feature separates the classes with a margin."""
    gen = np.random.default_rng(seed)
    X = gen.normal(size=(n, p))
    j = int(gen.integers(0, p))
    y = np.zeros(n, dtype=int)
    y[: n // 2] = 1
    X[y == 1, j] = gen.uniform(1.0, 2.0, size=n // 2)
    X[y == 0, j] = gen.uniform(-2.0, -1.0, size=n - n // 2)
    return X, y


class TestAdaBoost:
    def test_perfect_stump_stops_early_with_clamped_weight(self):
        X, y = separable_stump_instance(0)
        model = AdaBoostLearner(screen_m=5).fit(X, y)
        assert len(model.stump_alphas_) == 1
        assert model.stump_alphas_[0] == pytest.approx(0.5 * np.log((1 - 1e-10) / 1e-10))
        assert model.train_errors_[-1] == 0.0
        assert auc(model.predict_score(X), y) == 1.0

    def test_training_error_non_increasing_on_stump_separable_data(self):
        for seed in range(20):
            X, y = separable_stump_instance(seed, n=20 + 2 * seed)
            model = AdaBoostLearner(rounds=60, screen_m=5).fit(X, y)
            errs = model.train_errors_
            assert np.all(np.diff(errs) <= 1e-12), f"seed {seed}: {errs}"
            assert errs[-1] == 0.0

    def test_drives_training_error_to_zero_on_diagonal_margin(self):
        # not stump-separable: boosting needs several rounds; the raw 0/1
        # error may flicker early, but it must reach zero and stay there
        for seed in range(5):
            gen = np.random.default_rng(seed + 100)
            n = 30
            X = gen.normal(size=(n, 4))
            margin = X[:, 0] + X[:, 1]
            keep = np.abs(margin) > 0.3
            X, y = X[keep], (margin[keep] > 0).astype(int)
            if y.sum() in (0, len(y)):
                continue
            model = AdaBoostLearner(rounds=100, screen_m=4).fit(X, y)
            assert model.train_errors_[-1] == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_first_stump_matches_exhaustive_search(self, seed):
        gen = np.random.default_rng(seed + 300)
        n, p = 18, 4
        X = gen.normal(size=(n, p))
        y = gen.integers(0, 2, n)
        y[:2], y[-2:] = 0, 1
        model = AdaBoostLearner(rounds=1, screen_m=p).fit(X, y)
        # brute force over every feature, midpoint threshold and polarity
        y_signed = np.where(y == 1, 1.0, -1.0)
        w = np.full(n, 1.0 / n)
        best = np.inf
        for j in range(p):
            vals = np.unique(X[:, j])
            for lo, hi in zip(vals[:-1], vals[1:]):
                thr = 0.5 * (lo + hi)
                for pol in (1.0, -1.0):
                    pred = pol * np.where(X[:, j] > thr, 1.0, -1.0)
                    best = min(best, w[pred != y_signed].sum())
        # stump feature indices address the screened (rank-ordered) matrix
        raw_feature = model.ranking_.selected[model.stump_features_[0]]
        chosen_pred = model.stump_polarities_[0] * np.where(
            X[:, raw_feature] > model.stump_thresholds_[0], 1.0, -1.0
        )
        chosen_err = w[chosen_pred != y_signed].sum()
        assert chosen_err == pytest.approx(best, abs=1e-12)

    def test_stops_when_no_stump_beats_chance(self):
        # one duplicated constant-ish pattern: identical x for both labels
        X = np.array([[1.0], [1.0], [2.0], [2.0]])
        y = np.array([0, 1, 0, 1])
        model = AdaBoostLearner(screen_m=1).fit(X, y)
        assert len(model.stump_alphas_) == 0
        assert np.allclose(model.predict_score(X), 0.0)


class TestRandomForest:
    def test_interpolates_separable_training_data(self):
        X, y = two_cluster_data(n_per_class=10, p=2, seed=15)
        model = RandomForestLearner(screen_m=2, random_state=5).fit(X, y)
        assert auc(model.predict_score(X), y) == 1.0

    def test_scores_are_vote_fractions(self):
        X, y = noisy_data(n=30, seed=16)
        model = RandomForestLearner(n_trees=50, screen_m=4, random_state=6).fit(X, y)
        scores = model.predict_score(np.random.default_rng(2).normal(size=(25, X.shape[1])))
        assert np.allclose(scores * 50, np.round(scores * 50))
        assert scores.min() >= 0.0 and scores.max() <= 1.0

    def test_different_streams_give_different_forests(self):
        X, y = noisy_data(n=40, seed=17)
        a = RandomForestLearner(screen_m=4, random_state=RngStream(1)).fit(X, y)
        b = RandomForestLearner(screen_m=4, random_state=RngStream(2)).fit(X, y)
        assert not np.array_equal(a.predict_score(X), b.predict_score(X))
