"""Regression models (ridge, RBF-SVR) and evaluation metrics.

Ridge is solved in closed form on centered data with the intercept left
unpenalized.  SVR solves the epsilon-insensitive dual with an RBF kernel by
pairwise coordinate updates on the maximal KKT-violating pair, LIBSVM style,
on the 2n-variable (alpha, alpha*) parametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class RidgeModel:
    weights: np.ndarray
    intercept: float
    regularization: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or not np.isfinite(w).all() or not math.isfinite(self.intercept):
            raise ValueError("ridge parameters must be a finite vector plus finite intercept")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray  # (m, d) training points with nonzero dual coefficient
    dual_coef: np.ndarray  # (m,) alpha - alpha*
    bias: float
    gamma: float
    C: float
    epsilon: float
    dual_objective: float = math.nan  # minimization-form dual value at termination
    n_updates: int = 0

    def __post_init__(self):
        sv = np.asarray(self.support_vectors, dtype=float)
        coef = np.asarray(self.dual_coef, dtype=float)
        if np.any(np.abs(coef) > self.C * (1 + 1e-12)):
            raise ValueError("dual coefficients violate the box constraint")
        if coef.size and abs(coef.sum()) > 1e-6 * self.C:
            raise ValueError("dual coefficients violate the equality constraint")
        sv.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coef", coef)


@dataclass(frozen=True)
class Metrics:
    rmse: float
    cc: float  # nan when undefined
    cc_defined: bool


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise ValueError(f"bad training shapes X{X.shape}, y{y.shape}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data contains non-finite values")
    return X, y


def ridge_fit(X: np.ndarray, y: np.ndarray, r: float) -> RidgeModel:
    """Minimize ||y - Xw - b||^2 + r ||w||^2 with the intercept unpenalized.

    Centering makes the intercept drop out; for r = 0 on rank-deficient data
    the minimum-norm solution is returned.
    """
    X, y = _check_xy(X, y)
    if r < 0:
        raise ValueError(f"regularization must be >= 0, got {r}")
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    if r > 0:
        d = X.shape[1]
        w = np.linalg.solve(Xc.T @ Xc + r * np.eye(d), Xc.T @ yc)
    else:
        w = np.linalg.lstsq(Xc, yc, rcond=None)[0]
    return RidgeModel(weights=w, intercept=float(y_mean - x_mean @ w), regularization=r)


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """k(a, b) = exp(-gamma * ||a - b||^2)."""
    return np.exp(-gamma * cdist(np.atleast_2d(A), np.atleast_2d(B), "sqeuclidean"))


def svr_dual_objective(theta: np.ndarray, K: np.ndarray, y: np.ndarray, epsilon: float) -> float:
    """Minimization-form dual value for a stacked (alpha, alpha*) vector."""
    n = y.shape[0]
    beta = theta[:n] - theta[n:]
    return float(0.5 * beta @ K @ beta + epsilon * theta.sum() - y @ beta)


def svr_fit(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    gamma: float,
    tol: float | None = None,
    max_updates: int = 100_000,
) -> SvrModel:
    """Fit epsilon-insensitive RBF-SVR by SMO-style pair updates.

    Stops once the maximal KKT violation (the LIBSVM m - M gap) falls to
    ``tol``; raises if ``max_updates`` pair updates are not enough.  The
    default tolerance is scale-aware so the dual optimum is located well
    below typical benchmark noise.
    """
    X, y = _check_xy(X, y)
    if C <= 0 or epsilon < 0 or gamma <= 0:
        raise ValueError(f"need C > 0, epsilon >= 0, gamma > 0; got {C}, {epsilon}, {gamma}")
    if tol is None:
        spread = float(np.ptp(y)) if y.size > 1 else 1.0
        tol = 1e-6 * max(1.0, spread)
    n = X.shape[0]
    K = rbf_kernel(X, X, gamma)

    theta = np.zeros(2 * n)
    k_beta = np.zeros(n)  # K @ (alpha - alpha*), kept incrementally
    updates = 0
    while True:
        minus_sg = np.concatenate([y - epsilon - k_beta, y + epsilon - k_beta])
        up_vals = np.where(
            np.concatenate([theta[:n] < C, theta[n:] > 0]), minus_sg, -np.inf
        )
        low_vals = np.where(
            np.concatenate([theta[:n] > 0, theta[n:] < C]), minus_sg, np.inf
        )
        i = int(up_vals.argmax())
        j = int(low_vals.argmin())
        gap = up_vals[i] - low_vals[j]
        if gap <= tol:
            break
        if updates >= max_updates:
            raise RuntimeError(
                f"SVR solver did not converge within {max_updates} pair updates; "
                f"worst KKT violation {gap:.3e}"
            )
        pi, pj = i % n, j % n
        si = 1.0 if i < n else -1.0
        sj = 1.0 if j < n else -1.0
        a = max(K[pi, pi] + K[pj, pj] - 2.0 * K[pi, pj], 1e-12)
        t = (minus_sg[i] - minus_sg[j]) / a  # = (sj*Gj - si*Gi)/a > 0 for a violating pair
        lo_i, hi_i = (-theta[i], C - theta[i]) if si > 0 else (theta[i] - C, theta[i])
        lo_j, hi_j = (theta[j] - C, theta[j]) if sj > 0 else (-theta[j], C - theta[j])
        t = min(max(t, max(lo_i, lo_j)), min(hi_i, hi_j))
        theta[i] = min(max(theta[i] + si * t, 0.0), C)
        theta[j] = min(max(theta[j] - sj * t, 0.0), C)
        k_beta += t * (K[:, pi] - K[:, pj])
        updates += 1

    beta = theta[:n] - theta[n:]
    interior = (theta > 1e-9 * C) & (theta < (1 - 1e-9) * C)
    if interior.any():
        minus_sg = np.concatenate([y - epsilon - k_beta, y + epsilon - k_beta])
        bias = float(minus_sg[interior].mean())
    else:
        bias = float((up_vals[i] + low_vals[j]) / 2.0)

    objective = svr_dual_objective(theta, K, y, epsilon)
    nz = np.abs(beta) > 0
    return SvrModel(
        support_vectors=X[nz],
        dual_coef=beta[nz],
        bias=bias,
        gamma=gamma,
        C=C,
        epsilon=epsilon,
        dual_objective=objective,
        n_updates=updates,
    )


@dataclass(frozen=True)
class ModelConfig:
    """A model family plus its hyperparameters, able to fit itself.

    For SVR the tube half-width is data-dependent:
    ``epsilon = epsilon_factor * std(y_train)`` (population convention).
    """

    kind: str  # "ridge" | "svr"
    name: str = ""
    r: float = 0.1
    C: float = 50.0
    epsilon_factor: float = 0.1
    gamma: float = 0.01

    def __post_init__(self):
        if self.kind not in ("ridge", "svr"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    def fit(self, X: np.ndarray, y: np.ndarray):
        if self.kind == "ridge":
            return ridge_fit(X, y, self.r)
        epsilon = self.epsilon_factor * float(np.std(np.asarray(y, dtype=float)))
        return svr_fit(X, y, C=self.C, epsilon=epsilon, gamma=self.gamma)


RIDGE_DEFAULT = ModelConfig(kind="ridge")
SVR_DEFAULT = ModelConfig(kind="svr")


def predict(model, X: np.ndarray) -> np.ndarray:
    """Evaluate a fitted model on rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(model, RidgeModel):
        if X.shape[1] != model.weights.shape[0]:
            raise ValueError(
                f"expected {model.weights.shape[0]} feature columns, got {X.shape[1]}"
            )
        return X @ model.weights + model.intercept
    if isinstance(model, SvrModel):
        if model.support_vectors.size == 0:
            return np.full(X.shape[0], model.bias)
        if X.shape[1] != model.support_vectors.shape[1]:
            raise ValueError(
                f"expected {model.support_vectors.shape[1]} feature columns, got {X.shape[1]}"
            )
        return rbf_kernel(X, model.support_vectors, model.gamma) @ model.dual_coef + model.bias
    raise TypeError(f"unsupported model type {type(model).__name__}")


def evaluate(y_true: np.ndarray, y_pred: np.ndarray) -> Metrics:
    """RMSE plus Pearson correlation; CC is flagged undefined for constant vectors."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size < 1:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    rmse = float(np.sqrt(np.mean((y_true - y_pred) ** 2)))
    t = y_true - y_true.mean()
    p = y_pred - y_pred.mean()
    denom = np.sqrt((t @ t) * (p @ p))
    if y_true.size < 2 or denom == 0:
        return Metrics(rmse=rmse, cc=math.nan, cc_defined=False)
    return Metrics(rmse=rmse, cc=float(t @ p / denom), cc_defined=True)
