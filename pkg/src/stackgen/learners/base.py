"""Shared learner plumbing: specs, input validation, array serialization."""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass

import numpy as np

from ..data import validate_labels, validate_matrix
from ..errors import (
    BadHyperparameter,
    DimensionMismatch,
    SingleClassTraining,
    WrongModelKind,
)

ALGORITHMS = ("logistic", "svm_rbf", "mlp", "random_forest", "knn")

MODEL_FORMAT = "stackgen-model"
MODEL_VERSION = 1


def _positive(name, v, kind=float):
    v = kind(v)
    if not v > 0 or (kind is float and not math.isfinite(v)):
        raise BadHyperparameter(f"{name} must be a positive {kind.__name__}, got {v}")
    return v


def _non_negative(name, v):
    v = float(v)
    if not v >= 0 or not math.isfinite(v):
        raise BadHyperparameter(f"{name} must be >= 0, got {v}")
    return v


def _choice(name, v, allowed):
    if v not in allowed:
        raise BadHyperparameter(f"{name} must be one of {allowed}, got {v!r}")
    return v


# Per-algorithm hyperparameter records: {name: (default, validator)}.
# Defaults are the reproduction settings.
_SCHEMAS: dict[str, dict] = {
    "logistic": {
        "C": (1.0, lambda v: _positive("C", v)),
        "lr": (0.1, lambda v: _positive("lr", v)),
        "max_epochs": (5000, lambda v: _positive("max_epochs", v, int)),
        "tol": (1e-6, lambda v: _positive("tol", v)),
    },
    "svm_rbf": {
        "C": (1.0, lambda v: _positive("C", v)),
        "gamma": ("scale", lambda v: v if v == "scale" else _positive("gamma", v)),
        "tol": (1e-3, lambda v: _positive("tol", v)),
        # step-acceptance threshold well below tol, so pair updates keep
        # refining until the KKT residuals actually reach tol
        "eps": (1e-6, lambda v: _positive("eps", v)),
        "max_sweeps": (1000, lambda v: _positive("max_sweeps", v, int)),
        # recorded for completeness; an RBF kernel has no degree, so this
        # is accepted and ignored
        "degree": (3, lambda v: _positive("degree", v, int)),
    },
    "mlp": {
        "hidden": (1000, lambda v: _positive("hidden", v, int)),
        "alpha": (0.1, lambda v: _non_negative("alpha", v)),
        "lr": (1e-3, lambda v: _positive("lr", v)),
        "batch": (200, lambda v: _positive("batch", v, int)),
        "max_epochs": (300, lambda v: _positive("max_epochs", v, int)),
        "plateau_tol": (1e-5, lambda v: _positive("plateau_tol", v)),
        "plateau_epochs": (10, lambda v: _positive("plateau_epochs", v, int)),
    },
    "random_forest": {
        "n_trees": (500, lambda v: _positive("n_trees", v, int)),
        "max_depth": (10, lambda v: _positive("max_depth", v, int)),
        "min_leaf_fraction": (0.005, lambda v: _non_negative("min_leaf_fraction", v)),
        "max_features": ("sqrt", lambda v: v if v == "sqrt" else _positive("max_features", v, int)),
    },
    "knn": {
        "k": (5, lambda v: _positive("k", v, int)),
        "metric": ("euclidean", lambda v: _choice("metric", v, ("euclidean", "manhattan", "minkowski3"))),
    },
}


@dataclass(frozen=True)
class LearnerSpec:
    """Algorithm choice plus validated hyperparameters plus a seed.

    Unknown hyperparameter names and out-of-range values are rejected at
    construction; omitted ones take the reproduction defaults.
    """

    algorithm: str
    seed: int = 0
    params: tuple = ()  # sorted (name, value) pairs, filled in __post_init__

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise BadHyperparameter(
                f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}"
            )
        schema = _SCHEMAS[self.algorithm]
        given = dict(self.params)
        unknown = set(given) - set(schema)
        if unknown:
            raise BadHyperparameter(
                f"{self.algorithm} does not take {sorted(unknown)}; valid: {sorted(schema)}"
            )
        filled = {}
        for name, (default, check) in schema.items():
            filled[name] = check(given[name]) if name in given else default
        object.__setattr__(self, "params", tuple(sorted(filled.items())))
        object.__setattr__(self, "seed", int(self.seed))

    def param(self, name):
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(name)

    def params_dict(self) -> dict:
        return dict(self.params)

    def to_doc(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "params": self.params_dict(),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "LearnerSpec":
        return cls(algorithm=doc["algorithm"], seed=doc["seed"],
                   params=tuple(sorted(doc.get("params", {}).items())))


def check_fit_inputs(X, y):
    """Common fit preconditions; returns validated (X, y)."""
    X = validate_matrix(X)
    y = validate_labels(np.asarray(y), X.shape[0])
    if X.shape[0] < 2:
        raise DimensionMismatch(f"need at least 2 training rows, got {X.shape[0]}")
    if y.min() == y.max():
        raise SingleClassTraining(
            f"training labels are all {int(y[0])}; need both classes"
        )
    return X, y


def check_predict_input(X, n_features: int):
    X = validate_matrix(X)
    if X.shape[1] != n_features:
        raise DimensionMismatch(
            f"model was fit on {n_features} features, got {X.shape[1]}"
        )
    return X


def require_kind(model, algorithm: str):
    if getattr(model, "algorithm", None) != algorithm:
        raise WrongModelKind(
            f"expected a {algorithm} model, got {getattr(model, 'algorithm', type(model).__name__)}"
        )


# ----------------------------------------------------------- serialization

def encode_array(a: np.ndarray) -> dict:
    """JSON-safe array encoding: dtype tag, shape, base64 little-endian bytes."""
    a = np.ascontiguousarray(a)
    le = a.astype(a.dtype.newbyteorder("<"), copy=False)
    return {
        "dtype": le.dtype.str,
        "shape": list(a.shape),
        "data": base64.b64encode(le.tobytes()).decode("ascii"),
    }


def decode_array(doc: dict) -> np.ndarray:
    raw = base64.b64decode(doc["data"])
    a = np.frombuffer(raw, dtype=np.dtype(doc["dtype"])).reshape(doc["shape"])
    return np.ascontiguousarray(a.astype(a.dtype.newbyteorder("="), copy=True))


def model_envelope(algorithm: str, spec: LearnerSpec, payload: dict) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": algorithm,
        "spec": spec.to_doc(),
        "fitted": payload,
    }


def open_envelope(doc: dict, algorithm: str) -> tuple[LearnerSpec, dict]:
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ValueError(
            f"not a {MODEL_FORMAT} v{MODEL_VERSION} document: "
            f"{doc.get('format')!r} v{doc.get('version')!r}"
        )
    if doc.get("algorithm") != algorithm:
        raise WrongModelKind(f"expected {algorithm}, document holds {doc.get('algorithm')!r}")
    return LearnerSpec.from_doc(doc["spec"]), doc["fitted"]
