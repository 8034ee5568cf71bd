"""Base learners and the meta learner behind one fit/predict contract.

Every algorithm exposes ``fit(spec, X, y) -> model`` where the model has
``predict_proba(X)`` and serializes through ``to_doc``/``from_doc``
bit-exactly. Dispatch happens on ``LearnerSpec.algorithm``.
"""

from __future__ import annotations

from . import forest, knn, logistic, mlp, svm
from .base import ALGORITHMS, LearnerSpec, require_kind

_MODULES = {
    "logistic": logistic,
    "svm_rbf": svm,
    "mlp": mlp,
    "random_forest": forest,
    "knn": knn,
}

__all__ = [
    "ALGORITHMS",
    "LearnerSpec",
    "fit",
    "predict_proba",
    "decision_function_svm",
    "mlp_loss_gradient",
    "model_to_doc",
    "model_from_doc",
]


def fit(spec: LearnerSpec, X, y):
    """Train the algorithm named by the spec; deterministic in (spec, X, y)."""
    return _MODULES[spec.algorithm].fit(spec, X, y)


def predict_proba(model, X):
    """Class-1 probability per row of X."""
    return model.predict_proba(X)


def decision_function_svm(model, X):
    """Signed SVM margins; rejects models of any other kind."""
    require_kind(model, "svm_rbf")
    return model.decision(X)


def mlp_loss_gradient(model, X, y):
    """Exact loss gradients of an MLP for finite-difference checking."""
    require_kind(model, "mlp")
    return model.loss_gradient(X, y)


def model_to_doc(model) -> dict:
    return model.to_doc()


def model_from_doc(doc: dict):
    algorithm = doc.get("algorithm")
    if algorithm not in _MODULES:
        raise ValueError(f"document names unknown algorithm {algorithm!r}")
    return _MODULES[algorithm].from_doc(doc)
