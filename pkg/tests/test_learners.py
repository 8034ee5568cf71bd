"""Learner tests: worked examples, invariants, gradient and dual checks."""

import numpy as np
import pytest

from stackgen.errors import (
    BadHyperparameter,
    SingleClassTraining,
    WrongModelKind,
)
from stackgen.learners import (
    LearnerSpec,
    decision_function_svm,
    fit,
    mlp_loss_gradient,
    model_from_doc,
    model_to_doc,
)
from stackgen.learners.forest import ForestModel
from stackgen.learners.logistic import LogisticModel
from stackgen.learners.mlp import MlpModel
from stackgen.learners.svm import rbf_cross


def blobs(n=40, d=3, gap=2.5, seed=0):
    """Two well-separated gaussian clusters, shuffled."""
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(-gap, 1.0, (half, d)),
        rng.normal(gap, 1.0, (n - half, d)),
    ])
    y = np.r_[np.zeros(half, np.int8), np.ones(n - half, np.int8)]
    perm = rng.permutation(n)
    return X[perm], y[perm]


SMALL_SPECS = [
    LearnerSpec("logistic", seed=3),
    LearnerSpec("svm_rbf", seed=3),
    LearnerSpec("mlp", seed=3, params=(("hidden", 12), ("max_epochs", 60))),
    LearnerSpec("random_forest", seed=3, params=(("n_trees", 15),)),
    LearnerSpec("knn", seed=3),
]


# ------------------------------------------------------------ LearnerSpec

class TestSpec:
    def test_defaults_fill_in(self):
        spec = LearnerSpec("random_forest")
        assert spec.param("n_trees") == 500
        assert spec.param("max_depth") == 10
        assert spec.param("min_leaf_fraction") == 0.005

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(BadHyperparameter):
            LearnerSpec("gradient_boosting")

    def test_unknown_param_rejected(self):
        with pytest.raises(BadHyperparameter):
            LearnerSpec("knn", params=(("n_trees", 3),))

    def test_invalid_values_rejected(self):
        with pytest.raises(BadHyperparameter):
            LearnerSpec("knn", params=(("k", 0),))
        with pytest.raises(BadHyperparameter):
            LearnerSpec("random_forest", params=(("n_trees", -5),))
        with pytest.raises(BadHyperparameter):
            LearnerSpec("mlp", params=(("alpha", -0.1),))

    def test_doc_round_trip(self):
        spec = LearnerSpec("svm_rbf", seed=11, params=(("C", 2.0),))
        assert LearnerSpec.from_doc(spec.to_doc()) == spec


# ---------------------------------------------------------- shared contract

class TestFitContract:
    @pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.algorithm)
    def test_single_class_rejected(self, spec):
        X = np.random.default_rng(0).normal(size=(10, 3))
        with pytest.raises(SingleClassTraining):
            fit(spec, X, np.ones(10, np.int8))

    @pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.algorithm)
    def test_probabilities_bounded_and_finite(self, spec):
        X, y = blobs(seed=1)
        p = fit(spec, X, y).predict_proba(X)
        assert np.isfinite(p).all()
        assert p.min() >= 0.0 and p.max() <= 1.0

    @pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.algorithm)
    def test_same_seed_refit_is_bit_identical(self, spec):
        X, y = blobs(seed=2)
        Xq = np.random.default_rng(9).normal(size=(7, X.shape[1]))
        a = fit(spec, X, y).predict_proba(Xq)
        b = fit(spec, X, y).predict_proba(Xq)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.algorithm)
    def test_serialization_round_trips_bit_exactly(self, spec):
        X, y = blobs(seed=3)
        model = fit(spec, X, y)
        clone = model_from_doc(model_to_doc(model))
        assert np.array_equal(model.predict_proba(X), clone.predict_proba(X))


# ---------------------------------------------------------------- logistic

class TestLogistic:
    def test_separable_quadrant_data_fits_perfectly(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 0, 1, 1], np.int8)
        model = fit(LearnerSpec("logistic"), X, y)
        assert np.array_equal((model.predict_proba(X) >= 0.5).astype(np.int8), y)

    def test_zero_weight_model_outputs_half(self):
        model = LogisticModel(
            spec=LearnerSpec("logistic"), weights=np.zeros(3), intercept=0.0,
            epochs_run=0, final_loss=0.0,
        )
        assert np.all(model.predict_proba(np.random.default_rng(0).normal(size=(5, 3))) == 0.5)

    def test_positive_weight_monotonicity(self):
        X, y = blobs(n=60, d=2, seed=4)
        model = fit(LearnerSpec("logistic"), X, y)
        j = int(np.argmax(model.weights))
        assert model.weights[j] > 0
        base = np.zeros((1, 2))
        probe = base.copy()
        grid = np.linspace(-3, 3, 13)
        ps = []
        for g in grid:
            probe[0, j] = g
            ps.append(model.predict_proba(probe)[0])
        assert np.all(np.diff(ps) >= 0)

    def test_gradient_matches_finite_differences(self):
        X, y = blobs(n=10, d=4, seed=5)
        model = fit(LearnerSpec("logistic", params=(("max_epochs", 40),)), X, y)
        rel = _fd_check_logistic(model, X, y.astype(float))
        assert rel <= 1e-4, rel


def _fd_check_logistic(model, X, y, h=1e-6):
    g = model.loss_gradient(X, y)
    packed = np.r_[g["weights"], g["intercept"]]
    fd = np.empty_like(packed)
    for i in range(len(packed)):
        fd[i] = _central_diff_logistic(model, X, y, i, h)
    denom = max(np.linalg.norm(packed), np.linalg.norm(fd), 1e-12)
    return np.linalg.norm(packed - fd) / denom


def _central_diff_logistic(model, X, y, i, h):
    def at(delta):
        w = model.weights.copy()
        b = model.intercept
        if i < len(w):
            w[i] += delta
        else:
            b += delta
        probe = LogisticModel(spec=model.spec, weights=w, intercept=b,
                              epochs_run=0, final_loss=0.0)
        return probe.loss_gradient(X, y)["loss"]

    return (at(h) - at(-h)) / (2 * h)


# --------------------------------------------------------------------- SVM

class TestSvm:
    def test_rbf_kernel_is_one_at_zero_distance(self):
        X = np.random.default_rng(0).normal(size=(6, 3))
        K = rbf_cross(X, X, gamma=0.7)
        assert np.allclose(np.diag(K), 1.0, atol=1e-15)

    def test_two_point_instance_matches_closed_form_dual(self):
        # one point per class: the dual collapses to one variable with
        # optimum alpha = min(C, 1 / (1 - K12)) and symmetric decisions
        X = np.array([[1.0, 0.0], [-1.0, 0.0]])
        y = np.array([1, 0], np.int8)
        model = fit(LearnerSpec("svm_rbf", params=(("gamma", 0.5),)), X, y)
        k12 = float(np.exp(-0.5 * 4.0))
        a_star = min(1.0, 1.0 / (1.0 - k12))
        f_expected = np.array([
            a_star * (1.0 - k12),
            a_star * (k12 - 1.0),
        ])
        got = model.decision(X)
        assert np.allclose(got, f_expected, atol=1e-6)
        assert got[0] > 0 and got[1] < 0

    def test_brute_force_dual_agreement_on_two_points(self):
        # grid search the single free dual variable to 1e-7 resolution
        X = np.array([[0.3, -0.2], [1.1, 0.9]])
        y = np.array([0, 1], np.int8)
        gamma = 0.8
        model = fit(LearnerSpec("svm_rbf", params=(("gamma", gamma),)), X, y)
        K = rbf_cross(X, X, gamma)
        k12 = K[0, 1]
        grid = np.linspace(0.0, 1.0, 10_000_001)
        obj = 2 * grid - grid * grid * (1.0 - k12)  # W(a) with K11=K22=1
        a_best = grid[int(np.argmax(obj))]
        alpha_fit = np.abs(model.dual_coef)
        assert alpha_fit.shape == (2,)
        assert np.allclose(alpha_fit, a_best, atol=1e-6)

    def test_dual_feasibility_and_separation_random_instances(self):
        rng = np.random.default_rng(12)
        for trial in range(8):
            n = int(rng.integers(4, 13))
            X, y = blobs(n=n, d=2, gap=3.0, seed=100 + trial)
            model = fit(LearnerSpec("svm_rbf"), X, y)
            coef = model.dual_coef
            assert np.all(np.abs(coef) <= 1.0 + 1e-12)  # 0 <= alpha <= C
            assert abs(coef.sum()) <= 1e-8  # sum alpha_i y_i
            pred = (model.decision(X) > 0).astype(np.int8)
            assert np.array_equal(pred, y)

    def test_kkt_residual_on_non_bound_vectors(self):
        X, y = blobs(n=30, d=2, gap=2.0, seed=6)
        model = fit(LearnerSpec("svm_rbf"), X, y)
        f = model.decision(model.support_vectors)
        y_sv = np.sign(model.dual_coef)
        non_bound = (np.abs(model.dual_coef) > 1e-9) & (np.abs(model.dual_coef) < 1.0 - 1e-9)
        if non_bound.any():
            resid = np.abs(y_sv[non_bound] * f[non_bound] - 1.0)
            assert resid.max() <= 1e-3

    def test_wrong_model_kind(self):
        X, y = blobs(n=12, d=2, seed=7)
        logit = fit(LearnerSpec("logistic"), X, y)
        with pytest.raises(WrongModelKind):
            decision_function_svm(logit, X)

    def test_platt_probabilities_track_decision_sign(self):
        X, y = blobs(n=40, d=3, seed=8)
        model = fit(LearnerSpec("svm_rbf"), X, y)
        f = model.decision(X)
        p = model.predict_proba(X)
        # monotone link: larger margin, larger probability
        order = np.argsort(f)
        assert np.all(np.diff(p[order]) >= -1e-12)


# --------------------------------------------------------------------- MLP

class TestMlp:
    def _tiny_model(self, seed=0, alpha=0.1):
        X, y = blobs(n=10, d=3, seed=seed)
        spec = LearnerSpec("mlp", seed=seed,
                           params=(("hidden", 4), ("max_epochs", 5), ("alpha", alpha)))
        return fit(spec, X, y), X, y.astype(float)

    def test_gradient_matches_finite_differences(self):
        model, X, y = self._tiny_model(seed=3)
        rel = _fd_check_mlp(model, X, y)
        assert rel <= 1e-4, rel

    def test_zero_weight_balanced_labels_zero_output_bias_gradient(self):
        spec = LearnerSpec("mlp", params=(("hidden", 4),))
        model = MlpModel(spec=spec, W1=np.zeros((2, 4)), b1=np.zeros(4),
                         w2=np.zeros(4), b2=0.0, epochs_run=0, final_loss=0.0)
        X = np.random.default_rng(0).normal(size=(6, 2))
        y = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        g = model.loss_gradient(X, y)
        assert g["b2"] == 0.0

    def test_alpha_shifts_weight_gradient_by_alpha_times_weight(self):
        model, X, y = self._tiny_model(alpha=0.1)
        bare = MlpModel(spec=LearnerSpec("mlp", params=(("hidden", 4), ("alpha", 0.0))),
                        W1=model.W1.copy(), b1=model.b1.copy(),
                        w2=model.w2.copy(), b2=model.b2,
                        epochs_run=0, final_loss=0.0)
        g_reg = model.loss_gradient(X, y)
        g_bare = bare.loss_gradient(X, y)
        assert np.allclose(g_reg["W1"] - g_bare["W1"], 0.1 * model.W1, atol=1e-12)
        assert np.allclose(g_reg["w2"] - g_bare["w2"], 0.1 * model.w2, atol=1e-12)
        # biases are unpenalized
        assert np.allclose(g_reg["b1"], g_bare["b1"], atol=0)
        assert g_reg["b2"] == g_bare["b2"]

    def test_wrong_model_kind(self):
        X, y = blobs(n=12, d=2, seed=9)
        knn_model = fit(LearnerSpec("knn"), X, y)
        with pytest.raises(WrongModelKind):
            mlp_loss_gradient(knn_model, X, y)


def _fd_check_mlp(model, X, y, h=1e-6):
    g = mlp_loss_gradient(model, X, y)
    packed = np.concatenate([g["W1"].ravel(), g["b1"], g["w2"], [g["b2"]]])
    sizes = [model.W1.size, model.b1.size, model.w2.size, 1]
    fd = np.empty(sum(sizes))
    for flat_i in range(len(fd)):
        fd[flat_i] = _central_diff_mlp(model, X, y, flat_i, sizes, h)
    denom = max(np.linalg.norm(packed), np.linalg.norm(fd), 1e-12)
    return np.linalg.norm(packed - fd) / denom


def _central_diff_mlp(model, X, y, flat_i, sizes, h):
    def loss_at(delta):
        W1 = model.W1.copy()
        b1 = model.b1.copy()
        w2 = model.w2.copy()
        b2 = model.b2
        i = flat_i
        if i < sizes[0]:
            W1.ravel()[i] += delta
        elif i < sizes[0] + sizes[1]:
            b1[i - sizes[0]] += delta
        elif i < sizes[0] + sizes[1] + sizes[2]:
            w2[i - sizes[0] - sizes[1]] += delta
        else:
            b2 += delta
        probe = MlpModel(spec=model.spec, W1=W1, b1=b1, w2=w2, b2=b2,
                         epochs_run=0, final_loss=0.0)
        return probe.loss_gradient(X, y)["loss"]

    return (loss_at(h) - loss_at(-h)) / (2 * h)


# ------------------------------------------------------------------ forest

def _leaf_stump(value):
    """A single-leaf tree with the given class-1 fraction."""
    return (
        np.array([-1], np.int64), np.array([0.0]),
        np.array([-1], np.int64), np.array([-1], np.int64),
        np.array([float(value)]), np.array([1], np.int64),
    )


class TestForest:
    def test_three_trees_voting_two_to_one(self):
        model = ForestModel(
            spec=LearnerSpec("random_forest", params=(("n_trees", 3),)),
            trees=(_leaf_stump(1.0), _leaf_stump(1.0), _leaf_stump(0.0)),
            n_features=2, min_leaf=1, max_features_used=1,
        )
        p = model.predict_proba(np.zeros((1, 2)))
        assert p[0] == pytest.approx(2 / 3, abs=1e-15)

    def test_depth_and_leaf_size_bounds(self):
        X, y = blobs(n=80, d=5, gap=1.0, seed=10)
        spec = LearnerSpec("random_forest", seed=4, params=(("n_trees", 12),))
        model = fit(spec, X, y)
        for tree in model.trees:
            feature, _, left, right, _, count = tree
            stack = [(0, 0)]
            while stack:
                node, depth = stack.pop()
                assert depth <= spec.param("max_depth")
                if feature[node] < 0:
                    assert count[node] >= model.min_leaf
                else:
                    stack.append((int(left[node]), depth + 1))
                    stack.append((int(right[node]), depth + 1))

    def test_sqrt_feature_rule(self):
        X, y = blobs(n=30, d=9, seed=11)
        model = fit(LearnerSpec("random_forest", params=(("n_trees", 2),)), X, y)
        assert model.max_features_used == 3

    def test_pure_node_becomes_leaf(self):
        X = np.array([[0.0], [0.1], [5.0], [5.1]])
        y = np.array([0, 0, 1, 1], np.int8)
        model = fit(LearnerSpec("random_forest",
                                params=(("n_trees", 8), ("min_leaf_fraction", 0.0))), X, y)
        for tree in model.trees:
            feature, _, left, right, value, _ = tree
            for node in range(len(feature)):
                if feature[node] < 0 and value[node] in (0.0, 1.0):
                    continue  # pure leaves are fine
                if feature[node] < 0:
                    # mixed leaf: only allowed at the depth/size limits,
                    # which this shallow dataset never hits
                    raise AssertionError("mixed leaf on a separable dataset")


# -------------------------------------------------------------------- kNN

class TestKnn:
    def test_k1_memorizes_training_labels(self):
        X, y = blobs(n=20, d=3, seed=12)
        model = fit(LearnerSpec("knn", params=(("k", 1),)), X, y)
        assert np.array_equal(model.predict_proba(X), y.astype(float))

    def test_vote_fraction_three_of_five(self):
        # five training points at known distances from the origin query
        X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0], [50.0]])
        y = np.array([1, 1, 1, 0, 0, 0], np.int8)
        model = fit(LearnerSpec("knn"), X, y)
        assert model.predict_proba(np.array([[0.0]]))[0] == 0.6

    def test_distance_tie_breaks_toward_lower_index(self):
        # rows 0 and 1 are equidistant from the query; k=1 must pick row 0
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [9.0, 9.0]])
        y = np.array([1, 0, 0], np.int8)
        model = fit(LearnerSpec("knn", params=(("k", 1),)), X, y)
        assert model.predict_proba(np.array([[0.0, 0.0]]))[0] == 1.0

    def test_metric_changes_neighbour_ranking(self):
        # (3,0) vs (2,2): euclidean prefers (2,2) [8 < 9], manhattan
        # prefers (3,0) [3 < 4]
        X = np.array([[3.0, 0.0], [2.0, 2.0]])
        y = np.array([1, 0], np.int8)
        q = np.zeros((1, 2))
        eu = fit(LearnerSpec("knn", params=(("k", 1),)), X, y)
        ma = fit(LearnerSpec("knn", params=(("k", 1), ("metric", "manhattan"))), X, y)
        assert eu.predict_proba(q)[0] == 0.0
        assert ma.predict_proba(q)[0] == 1.0

    def test_minkowski3_between_the_two(self):
        X = np.array([[3.0, 0.0], [2.1, 2.1]])
        y = np.array([1, 0], np.int8)
        q = np.zeros((1, 2))
        # cubes: 27 vs 2 * 9.261 = 18.52 -> picks (2.1, 2.1)
        mk = fit(LearnerSpec("knn", params=(("k", 1), ("metric", "minkowski3"))), X, y)
        assert mk.predict_proba(q)[0] == 0.0

    def test_outputs_are_multiples_of_one_over_k(self):
        X, y = blobs(n=30, d=2, gap=0.8, seed=13)
        model = fit(LearnerSpec("knn"), X, y)
        p = model.predict_proba(X)
        assert np.all(np.isin(np.round(p * 5).astype(int), np.arange(6)))
        assert np.allclose(p * 5, np.round(p * 5), atol=0)

    def test_k_exceeding_rows_rejected(self):
        X, y = blobs(n=4, d=2, seed=14)
        with pytest.raises(BadHyperparameter):
            fit(LearnerSpec("knn", params=(("k", 9),)), X, y)
