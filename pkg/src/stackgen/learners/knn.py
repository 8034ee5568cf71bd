"""k-nearest-neighbour voting classifier, brute-force distances.

k=5 with uniform weights by default. Distances are computed without the
final root (squared Euclidean, cubed Minkowski) since roots are
monotone and cannot change the ranking. Neighbour ties at equal
distance resolve toward the lower training-row index via a stable sort.
The probability is the exact vote fraction, a rational with
denominator k. Deterministic with no randomness; the seed is unused.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadHyperparameter
from .base import (
    LearnerSpec,
    check_fit_inputs,
    check_predict_input,
    decode_array,
    encode_array,
    model_envelope,
    open_envelope,
)


def _distances(queries: np.ndarray, train: np.ndarray, metric: str) -> np.ndarray:
    diff = queries[:, None, :] - train[None, :, :]
    if metric == "euclidean":
        return np.einsum("qtd,qtd->qt", diff, diff)
    if metric == "manhattan":
        return np.sum(np.abs(diff), axis=2)
    if metric == "minkowski3":
        a = np.abs(diff)
        return np.sum(a * a * a, axis=2)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class KnnModel:
    algorithm = "knn"

    spec: LearnerSpec
    train_X: np.ndarray
    train_y: np.ndarray

    def __post_init__(self):
        self.train_X.setflags(write=False)
        self.train_y.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.train_X.shape[1]

    def neighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training rows per query row."""
        X = check_predict_input(X, self.n_features)
        d = _distances(X, self.train_X, self.spec.param("metric"))
        order = np.argsort(d, axis=1, kind="stable")
        return order[:, : self.spec.param("k")]

    def predict_proba(self, X) -> np.ndarray:
        nn = self.neighbors(X)
        votes = self.train_y[nn].astype(np.int64).sum(axis=1)
        return votes / self.spec.param("k")

    def to_doc(self) -> dict:
        return model_envelope(self.algorithm, self.spec, {
            "train_X": encode_array(self.train_X),
            "train_y": encode_array(self.train_y),
        })


def fit(spec: LearnerSpec, X, y) -> KnnModel:
    X, y8 = check_fit_inputs(X, y)
    k = spec.param("k")
    if k > X.shape[0]:
        raise BadHyperparameter(f"k={k} exceeds the {X.shape[0]} training rows")
    return KnnModel(spec=spec, train_X=X.copy(), train_y=y8.copy())


def from_doc(doc: dict) -> KnnModel:
    spec, fitted = open_envelope(doc, "knn")
    return KnnModel(
        spec=spec,
        train_X=decode_array(fitted["train_X"]),
        train_y=decode_array(fitted["train_y"]),
    )
