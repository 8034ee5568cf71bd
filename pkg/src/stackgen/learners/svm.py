"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The Gram matrix is built here in shared numpy code and handed to the
selected kernel backend's SMO routine, so backends see identical inputs
and, by construction, return identical duals. Probabilities come from a
sigmoid fit on the training decision values by Newton's method with the
usual prior-corrected targets.

C defaults to 1. gamma="scale" means 1 / (n_features * variance of all
training entries). A polynomial-style ``degree`` hyperparameter is
accepted for config compatibility but has no effect on an RBF kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from .base import (
    LearnerSpec,
    check_fit_inputs,
    check_predict_input,
    decode_array,
    encode_array,
    model_envelope,
    open_envelope,
)
from .logistic import sigmoid


def rbf_cross(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K[i, j] = exp(-gamma * ||A_i - B_j||^2)."""
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)  # guard tiny negative round-off
    return np.exp(-gamma * d2)


def resolve_gamma(gamma, X: np.ndarray) -> float:
    if gamma == "scale":
        var = float(X.var())
        if var <= 0.0:
            return 1.0
        return 1.0 / (X.shape[1] * var)
    return float(gamma)


def fit_sigmoid(decision: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Newton fit of P(y=1 | f) = 1 / (1 + exp(A f + B)).

    Targets are shrunk toward the class priors, which keeps the fit
    sane when training decisions are nearly separable.
    """
    f = np.asarray(decision, dtype=np.float64)
    n1 = int(np.sum(y == 1))
    n0 = len(y) - n1
    hi = (n1 + 1.0) / (n1 + 2.0)
    lo = 1.0 / (n0 + 2.0)
    t = np.where(np.asarray(y) == 1, hi, lo)

    sigma = 1e-12  # Hessian ridge
    eps = 1e-5
    min_step = 1e-10
    A = 0.0
    B = np.log((n0 + 1.0) / (n1 + 1.0))

    def objective(a, b):
        z = a * f + b
        return float(np.sum(t * z + np.logaddexp(0.0, -z)))

    fval = objective(A, B)
    for _ in range(100):
        z = A * f + B
        p = sigmoid(-z)  # P(y=1)
        q = sigmoid(z)
        d2 = p * q
        h11 = float(np.sum(f * f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(f * d2))
        d1 = t - p
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            new_a = A + step * dA
            new_b = B + step * dB
            new_f = objective(new_a, new_b)
            if new_f < fval + 1e-4 * step * gd:
                A, B, fval = new_a, new_b, new_f
                break
            step *= 0.5
        else:
            break  # line search exhausted
    return A, B


@dataclass(frozen=True)
class SvmModel:
    algorithm = "svm_rbf"

    spec: LearnerSpec
    support_vectors: np.ndarray  # rows with alpha > 0
    dual_coef: np.ndarray  # alpha_i * y_i (+/-) per support vector
    intercept: float
    gamma_value: float
    platt_a: float
    platt_b: float
    n_features: int
    sweeps: int
    converged: bool

    def __post_init__(self):
        self.support_vectors.setflags(write=False)
        self.dual_coef.setflags(write=False)

    def decision(self, X) -> np.ndarray:
        """Signed margins f(x) = sum_i alpha_i y_i K(sv_i, x) + b."""
        X = check_predict_input(X, self.n_features)
        return rbf_cross(X, self.support_vectors, self.gamma_value) @ self.dual_coef \
            + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(-(self.platt_a * self.decision(X) + self.platt_b))

    def to_doc(self) -> dict:
        return model_envelope(self.algorithm, self.spec, {
            "support_vectors": encode_array(self.support_vectors),
            "dual_coef": encode_array(self.dual_coef),
            "intercept": self.intercept,
            "gamma_value": self.gamma_value,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "n_features": self.n_features,
            "sweeps": self.sweeps,
            "converged": self.converged,
        })


def fit(spec: LearnerSpec, X, y) -> SvmModel:
    X, y8 = check_fit_inputs(X, y)
    y_pm = (2.0 * y8 - 1.0).astype(np.float64)
    C = spec.param("C")
    gamma = resolve_gamma(spec.param("gamma"), X)

    K = rbf_cross(X, X, gamma)
    alpha, b, sweeps, converged = _kernels.smo_solve(
        K, y_pm, C, spec.param("tol"), spec.param("eps"), spec.param("max_sweeps")
    )

    mask = alpha > 0.0
    decision_train = (alpha * y_pm) @ K + b  # f over training rows
    platt_a, platt_b = fit_sigmoid(decision_train, y8)

    return SvmModel(
        spec=spec,
        support_vectors=X[mask].copy(),
        dual_coef=(alpha * y_pm)[mask].copy(),
        intercept=float(b),
        gamma_value=gamma,
        platt_a=platt_a,
        platt_b=platt_b,
        n_features=X.shape[1],
        sweeps=int(sweeps),
        converged=bool(converged),
    )


def from_doc(doc: dict) -> SvmModel:
    spec, fitted = open_envelope(doc, "svm_rbf")
    return SvmModel(
        spec=spec,
        support_vectors=decode_array(fitted["support_vectors"]),
        dual_coef=decode_array(fitted["dual_coef"]),
        intercept=float(fitted["intercept"]),
        gamma_value=float(fitted["gamma_value"]),
        platt_a=float(fitted["platt_a"]),
        platt_b=float(fitted["platt_b"]),
        n_features=int(fitted["n_features"]),
        sweeps=int(fitted["sweeps"]),
        converged=bool(fitted["converged"]),
    )
