"""One-hidden-layer ReLU network trained with Adam on minibatches.

Architecture: input -> hidden (ReLU, default 1000 units) -> single
logistic output. The per-batch objective is mean cross-entropy plus
0.5 * alpha * (sum of squared weights) / batch_size, biases unpenalized;
gradients follow that normalization. Adam uses the bias-corrected step
size. Training stops at the epoch budget or when the epoch loss stops
improving by more than plateau_tol for plateau_epochs epochs in a row.

Initialization is He-style fan-in scaling drawn from the learner seed
(hidden weights first, then output weights); batch order reshuffles
every epoch from the same stream, so a fit is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import make_rng
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

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8


def _forward(X, W1, b1, w2, b2):
    Z1 = X @ W1 + b1
    A1 = np.maximum(Z1, 0.0)
    z2 = A1 @ w2 + b2
    return Z1, A1, z2


def _batch_loss_grads(X, y, W1, b1, w2, b2, alpha):
    """Loss and gradients with sklearn-style batch normalization."""
    m = X.shape[0]
    Z1, A1, z2 = _forward(X, W1, b1, w2, b2)
    p = sigmoid(z2)
    ce = float(np.mean(np.logaddexp(0.0, z2) - y * z2))
    reg = 0.5 * alpha * (float(np.sum(W1 * W1)) + float(np.sum(w2 * w2))) / m
    delta2 = p - y
    gw2 = (A1.T @ delta2 + alpha * w2) / m
    gb2 = float(np.sum(delta2)) / m
    delta1 = np.outer(delta2, w2)
    delta1[Z1 <= 0.0] = 0.0
    gW1 = (X.T @ delta1 + alpha * W1) / m
    gb1 = np.sum(delta1, axis=0) / m
    return ce + reg, gW1, gb1, gw2, gb2


class _Adam:
    def __init__(self, shapes, lr):
        self.lr = lr
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        lr_t = self.lr * np.sqrt(1.0 - _ADAM_B2 ** self.t) / (1.0 - _ADAM_B1 ** self.t)
        out = []
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= _ADAM_B1
            m += (1.0 - _ADAM_B1) * g
            v *= _ADAM_B2
            v += (1.0 - _ADAM_B2) * (g * g)
            out.append(p - lr_t * m / (np.sqrt(v) + _ADAM_EPS))
        return out


@dataclass(frozen=True)
class MlpModel:
    algorithm = "mlp"

    spec: LearnerSpec
    W1: np.ndarray  # (n_features, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float
    epochs_run: int
    final_loss: float

    def __post_init__(self):
        for a in (self.W1, self.b1, self.w2):
            a.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.W1.shape[0]

    def predict_proba(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        _, _, z2 = _forward(X, self.W1, self.b1, self.w2, self.b2)
        return sigmoid(z2)

    def loss_gradient(self, X, y):
        """Full-batch objective and its exact gradients at the fit.

        The objective here is mean cross-entropy plus
        0.5 * alpha * (sum of squared weights) with no division of the
        penalty by the sample count, so switching alpha changes each
        weight gradient by exactly alpha * weight. (Batch training above
        divides the penalty by the batch size instead.)
        """
        X = check_predict_input(X, self.n_features)
        y = np.asarray(y, dtype=np.float64)
        m = X.shape[0]
        alpha = self.spec.param("alpha")
        Z1, A1, z2 = _forward(X, self.W1, self.b1, self.w2, self.b2)
        p = sigmoid(z2)
        ce = float(np.mean(np.logaddexp(0.0, z2) - y * z2))
        loss = ce + 0.5 * alpha * (float(np.sum(self.W1 * self.W1))
                                   + float(np.sum(self.w2 * self.w2)))
        delta2 = p - y
        gw2 = A1.T @ delta2 / m + alpha * self.w2
        gb2 = float(np.sum(delta2)) / m
        delta1 = np.outer(delta2, self.w2)
        delta1[Z1 <= 0.0] = 0.0
        gW1 = X.T @ delta1 / m + alpha * self.W1
        gb1 = np.sum(delta1, axis=0) / m
        return {"loss": loss, "W1": gW1, "b1": gb1, "w2": gw2, "b2": gb2}

    def to_doc(self) -> dict:
        return model_envelope(self.algorithm, self.spec, {
            "W1": encode_array(self.W1),
            "b1": encode_array(self.b1),
            "w2": encode_array(self.w2),
            "b2": self.b2,
            "epochs_run": self.epochs_run,
            "final_loss": self.final_loss,
        })


def fit(spec: LearnerSpec, X, y) -> MlpModel:
    X, y8 = check_fit_inputs(X, y)
    y = y8.astype(np.float64)
    n, d = X.shape
    hidden = spec.param("hidden")
    alpha = spec.param("alpha")
    batch = min(spec.param("batch"), n)
    max_epochs = spec.param("max_epochs")
    plateau_tol = spec.param("plateau_tol")
    plateau_epochs = spec.param("plateau_epochs")

    rng = make_rng(spec.seed)
    W1 = rng.normal(0.0, np.sqrt(2.0 / d), size=(d, hidden))
    w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=hidden)
    b1 = np.zeros(hidden)
    b2 = 0.0

    adam = _Adam([W1.shape, b1.shape, w2.shape, ()], spec.param("lr"))
    best_loss = np.inf
    no_improve = 0
    epochs_run = 0
    epoch_loss = np.inf
    for _ in range(max_epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            idx = perm[start:start + batch]
            loss_b, gW1, gb1, gw2, gb2 = _batch_loss_grads(
                X[idx], y[idx], W1, b1, w2, b2, alpha
            )
            W1, b1, w2, b2 = adam.step([W1, b1, w2, b2], [gW1, gb1, gw2, gb2])
            total += loss_b * len(idx)
        epoch_loss = total / n
        epochs_run += 1
        if epoch_loss > best_loss - plateau_tol:
            no_improve += 1
        else:
            no_improve = 0
        if epoch_loss < best_loss:
            best_loss = epoch_loss
        if no_improve >= plateau_epochs:
            break

    return MlpModel(spec=spec, W1=W1, b1=b1, w2=w2, b2=float(b2),
                    epochs_run=epochs_run, final_loss=float(epoch_loss))


def from_doc(doc: dict) -> MlpModel:
    spec, fitted = open_envelope(doc, "mlp")
    return MlpModel(
        spec=spec,
        W1=decode_array(fitted["W1"]),
        b1=decode_array(fitted["b1"]),
        w2=decode_array(fitted["w2"]),
        b2=float(fitted["b2"]),
        epochs_run=int(fitted["epochs_run"]),
        final_loss=float(fitted["final_loss"]),
    )
