"""Logistic regression by full-batch gradient descent.

Minimizes J(w, b) = mean cross-entropy + ||w||^2 / (2 C n), intercept
unpenalized. Steps at learning rate 0.1; a step that raises the loss is
undone and the rate halved. Stops when the gradient max-norm drops
below tol or the epoch budget runs out. No randomness anywhere, so the
seed is accepted for interface uniformity and unused.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import (
    LearnerSpec,
    check_fit_inputs,
    check_predict_input,
    decode_array,
    encode_array,
    model_envelope,
    open_envelope,
)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _loss_and_grads(X, y, w, b, C):
    n = X.shape[0]
    z = X @ w + b
    p = sigmoid(z)
    # log(1 + e^z) - y z is the cross-entropy for either label, stably
    ce = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss = ce + float(w @ w) / (2.0 * C * n)
    resid = p - y
    gw = (X.T @ resid) / n + w / (C * n)
    gb = float(np.mean(resid))
    return loss, gw, gb


@dataclass(frozen=True)
class LogisticModel:
    algorithm = "logistic"

    spec: LearnerSpec
    weights: np.ndarray
    intercept: float
    epochs_run: int
    final_loss: float

    def __post_init__(self):
        self.weights.setflags(write=False)

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        return X @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision(X))

    def loss_gradient(self, X, y):
        """Training-objective gradients at the fitted parameters.

        Returns ``{"loss": float, "weights": array, "intercept": float}``
        for finite-difference verification.
        """
        X = check_predict_input(X, self.n_features)
        y = np.asarray(y, dtype=np.float64)
        loss, gw, gb = _loss_and_grads(X, y, self.weights, self.intercept,
                                       self.spec.param("C"))
        return {"loss": loss, "weights": gw, "intercept": gb}

    def to_doc(self) -> dict:
        return model_envelope(self.algorithm, self.spec, {
            "weights": encode_array(self.weights),
            "intercept": self.intercept,
            "epochs_run": self.epochs_run,
            "final_loss": self.final_loss,
        })


def fit(spec: LearnerSpec, X, y) -> LogisticModel:
    X, y8 = check_fit_inputs(X, y)
    y = y8.astype(np.float64)
    C = spec.param("C")
    lr = spec.param("lr")
    tol = spec.param("tol")
    max_epochs = spec.param("max_epochs")

    w = np.zeros(X.shape[1], dtype=np.float64)
    b = 0.0
    loss, gw, gb = _loss_and_grads(X, y, w, b, C)
    epoch = 0
    while epoch < max_epochs:
        if max(float(np.max(np.abs(gw))), abs(gb)) < tol:
            break
        w2 = w - lr * gw
        b2 = b - lr * gb
        loss2, gw2, gb2 = _loss_and_grads(X, y, w2, b2, C)
        epoch += 1
        if loss2 > loss:
            lr *= 0.5  # undo the step, retry smaller
            continue
        w, b, loss, gw, gb = w2, b2, loss2, gw2, gb2
    return LogisticModel(spec=spec, weights=w, intercept=b,
                         epochs_run=epoch, final_loss=loss)


def from_doc(doc: dict) -> LogisticModel:
    spec, fitted = open_envelope(doc, "logistic")
    return LogisticModel(
        spec=spec,
        weights=decode_array(fitted["weights"]),
        intercept=float(fitted["intercept"]),
        epochs_run=int(fitted["epochs_run"]),
        final_loss=float(fitted["final_loss"]),
    )
