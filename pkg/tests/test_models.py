import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alrpool.models import (
    ModelConfig,
    evaluate,
    predict,
    rbf_kernel,
    ridge_fit,
    svr_fit,
)

from _oracles import projected_gradient_svr


def ridge_gradient(X, y, w, b, r):
    resid = y - X @ w - b
    gw = -2.0 * X.T @ resid + 2.0 * r * w
    gb = -2.0 * resid.sum()
    return np.sqrt((gw**2).sum() + gb**2)


class TestRidge:
    def test_noiseless_identifiability(self):
        X = np.array([[1.0], [2.0], [3.0]])
        y = 2.0 * X[:, 0]
        model = ridge_fit(X, y, 0.0)
        assert model.weights[0] == pytest.approx(2.0, abs=1e-8)
        assert model.intercept == pytest.approx(0.0, abs=1e-8)

    def test_centered_closed_form_r1(self):
        model = ridge_fit(np.array([[1.0], [-1.0]]), np.array([1.0, -1.0]), 1.0)
        assert model.weights[0] == pytest.approx(2.0 / 3.0, rel=1e-12)
        assert model.intercept == pytest.approx(0.0, abs=1e-12)

    def test_constant_labels(self):
        X = np.random.default_rng(0).standard_normal((10, 3))
        model = ridge_fit(X, np.full(10, 4.5), 0.1)
        assert np.allclose(model.weights, 0.0, atol=1e-10)
        assert model.intercept == pytest.approx(4.5)

    @given(st.integers(0, 2000))
    @settings(max_examples=40, deadline=None)
    def test_matches_direct_normal_equations(self, seed):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(3, 30)), int(rng.integers(1, 5))
        X = rng.standard_normal((n, d))
        y = rng.standard_normal(n) * 3.0
        r = float(rng.uniform(0.01, 5.0))
        model = ridge_fit(X, y, r)
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        w = np.linalg.inv(Xc.T @ Xc + r * np.eye(d)) @ (Xc.T @ yc)
        assert np.allclose(model.weights, w, rtol=1e-8, atol=1e-10)
        grad = ridge_gradient(X, y, model.weights, model.intercept, r)
        assert grad <= 1e-6 * (1.0 + np.linalg.norm(y))

    def test_weight_norm_shrinks_with_regularization(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((20, 3))
        y = rng.standard_normal(20)
        norms = [np.linalg.norm(ridge_fit(X, y, r).weights) for r in (0.0, 0.1, 1.0, 10.0)]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))

    def test_rank_deficient_minimum_norm(self):
        X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([2.0, 4.0, 6.0])
        model = ridge_fit(X, y, 0.0)
        # min-norm solution splits the weight equally across the duplicated column
        assert np.allclose(model.weights, [1.0, 1.0], atol=1e-8)

    def test_validation(self):
        with pytest.raises(ValueError):
            ridge_fit(np.array([[np.nan]]), np.array([1.0]), 0.1)
        with pytest.raises(ValueError):
            ridge_fit(np.ones((2, 1)), np.ones(2), -0.5)


class TestSvr:
    def test_tube_swallows_data(self):
        y = np.array([1.0, 1.05, 0.95, 1.02])
        X = np.arange(4.0).reshape(-1, 1)
        model = svr_fit(X, y, C=50.0, epsilon=0.2, gamma=0.5)
        assert model.dual_coef.size == 0
        assert y.min() <= model.bias <= y.max()
        assert np.all(predict(model, X) == model.bias)

    def test_single_point(self):
        model = svr_fit(np.array([[2.0]]), np.array([7.0]), C=50.0, epsilon=0.1, gamma=0.5)
        assert model.dual_coef.size == 0
        assert model.bias == pytest.approx(7.0)
        assert predict(model, np.array([[2.0]]))[0] == pytest.approx(7.0)

    def test_five_point_instance_matches_qp_oracle(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((5, 1))
        y = rng.standard_normal(5)
        eps = 0.1 * float(np.std(y))
        model = svr_fit(X, y, C=50.0, epsilon=eps, gamma=0.5)
        K = rbf_kernel(X, X, 0.5)
        _, w_oracle = projected_gradient_svr(K, y, 50.0, eps)
        assert model.dual_objective == pytest.approx(w_oracle, rel=1e-4)

    def test_box_and_equality_constraints(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((12, 2))
        y = rng.standard_normal(12) * 2.0
        model = svr_fit(X, y, C=5.0, epsilon=0.05, gamma=0.3)
        assert np.all(np.abs(model.dual_coef) <= 5.0 + 1e-12)
        assert abs(model.dual_coef.sum()) <= 1e-6 * 5.0

    def test_predict_matches_kernel_expansion(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((9, 2))
        y = rng.standard_normal(9)
        model = svr_fit(X, y, C=10.0, epsilon=0.01, gamma=0.7)
        manual = np.exp(
            -0.7 * ((X[:, None, :] - model.support_vectors[None]) ** 2).sum(-1)
        ) @ model.dual_coef + model.bias
        assert np.allclose(predict(model, X), manual, atol=1e-9)

    def test_nonconvergence_reports_violation(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((10, 1))
        y = rng.standard_normal(10) * 5
        with pytest.raises(RuntimeError, match="KKT violation"):
            svr_fit(X, y, C=50.0, epsilon=0.001, gamma=0.5, max_updates=2)

    def test_validation(self):
        X, y = np.ones((2, 1)), np.ones(2)
        with pytest.raises(ValueError):
            svr_fit(X, y, C=0.0, epsilon=0.1, gamma=0.5)
        with pytest.raises(ValueError):
            svr_fit(X, y, C=1.0, epsilon=-0.1, gamma=0.5)
        with pytest.raises(ValueError):
            svr_fit(X, y, C=1.0, epsilon=0.1, gamma=0.0)


class TestEvaluate:
    def test_identity(self):
        m = evaluate(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
        assert m.rmse == 0.0 and m.cc == pytest.approx(1.0) and m.cc_defined

    def test_anticorrelation(self):
        y = np.array([1.0, 2.0, 5.0])
        m = evaluate(y, -y + 3.0)
        assert m.cc == pytest.approx(-1.0)

    def test_constant_prediction_flags_cc(self):
        m = evaluate(np.array([0.0, 2.0]), np.array([1.0, 1.0]))
        assert m.rmse == pytest.approx(1.0)
        assert not m.cc_defined and math.isnan(m.cc)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        y, p = rng.standard_normal(20), rng.standard_normal(20)
        perm = rng.permutation(20)
        assert evaluate(y, p).rmse == pytest.approx(evaluate(y[perm], p[perm]).rmse)

    def test_cc_affine_invariance(self):
        rng = np.random.default_rng(1)
        y, p = rng.standard_normal(20), rng.standard_normal(20)
        assert evaluate(y, 3.0 * p + 2.0).cc == pytest.approx(evaluate(y, p).cc)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(np.ones(3), np.ones(4))


class TestModelConfig:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ModelConfig(kind="forest")

    def test_svr_epsilon_from_population_std(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((8, 1))
        y = rng.standard_normal(8) * 4
        fitted = ModelConfig(kind="svr", C=10.0, epsilon_factor=0.1, gamma=0.5).fit(X, y)
        assert fitted.epsilon == pytest.approx(0.1 * np.std(y))

    def test_ridge_dispatch(self):
        X = np.array([[1.0], [2.0]])
        fitted = ModelConfig(kind="ridge", r=0.7).fit(X, np.array([1.0, 2.0]))
        assert fitted.regularization == 0.7
