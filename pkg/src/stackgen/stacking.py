"""Two-phase stacked generalization.

Phase 1 trains every base learner once per fold on the other folds and
records its probabilities for the held-out fold, giving each training
row a meta-feature vector produced without ever seeing that row. Phase 2
fits the meta-learner (logistic regression by default) on those
out-of-fold probabilities and the labels; it is handed only the
meta-feature matrix, never the original features. For prediction, the
base learners are refit on the full training set and the meta-learner
combines their probability outputs.

Per-fold training seeds derive from each base learner's own seed plus
the fold index, so two identical base specs produce identical
meta-feature columns and fold-parallel execution cannot change results.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import learners
from .data import FoldPlan, derive_seed, make_stratified_folds, validate_labels, validate_matrix
from .errors import BadHyperparameter, FoldFitFailure, StackgenError
from .learners import LearnerSpec

__all__ = [
    "StackSpec",
    "StackModel",
    "build_meta_features",
    "fit_stack",
    "predict_stack",
    "default_stack",
]

STACK_FORMAT = "stackgen-stack"
STACK_VERSION = 1


@dataclass(frozen=True)
class StackSpec:
    """Ordered base learners, a meta learner, fold count and master seed.

    Base order is meaningful: it fixes the meta-feature column order.
    """

    base: tuple
    meta: LearnerSpec = field(default_factory=lambda: LearnerSpec("logistic"))
    n_folds: int = 5
    seed: int = 0
    logit_meta_inputs: bool = False  # feed log-odds instead of raw probabilities

    def __post_init__(self):
        base = tuple(self.base)
        if not base:
            raise BadHyperparameter("a stack needs at least one base learner")
        for b in base:
            if not isinstance(b, LearnerSpec):
                raise BadHyperparameter(f"base entries must be LearnerSpec, got {type(b).__name__}")
        if not isinstance(self.meta, LearnerSpec):
            raise BadHyperparameter("meta must be a LearnerSpec")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "n_folds", int(self.n_folds))
        object.__setattr__(self, "seed", int(self.seed))

    def to_doc(self) -> dict:
        return {
            "base": [b.to_doc() for b in self.base],
            "meta": self.meta.to_doc(),
            "n_folds": self.n_folds,
            "seed": self.seed,
            "logit_meta_inputs": self.logit_meta_inputs,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "StackSpec":
        return cls(
            base=tuple(LearnerSpec.from_doc(b) for b in doc["base"]),
            meta=LearnerSpec.from_doc(doc["meta"]),
            n_folds=doc["n_folds"],
            seed=doc["seed"],
            logit_meta_inputs=doc.get("logit_meta_inputs", False),
        )


def default_stack(seed: int = 0) -> StackSpec:
    """The shipped default: SVM, MLP, forest and kNN bases
    with a default-hyperparameter logistic meta-learner over 5 folds."""
    algorithms = ("svm_rbf", "mlp", "random_forest", "knn")
    base = tuple(
        LearnerSpec(a, seed=derive_seed(seed, f"base-{j}-{a}"))
        for j, a in enumerate(algorithms)
    )
    return StackSpec(base=base, meta=LearnerSpec("logistic", seed=derive_seed(seed, "meta")),
                     n_folds=5, seed=seed)


def _fold_seed(base_spec: LearnerSpec, fold: int) -> int:
    return derive_seed(base_spec.seed, f"fold-{fold}")


def _logit(p: np.ndarray) -> np.ndarray:
    q = np.clip(p, 1e-12, 1.0 - 1e-12)
    return np.log(q / (1.0 - q))


def build_meta_features(spec: StackSpec, X, y, fitter=learners.fit):
    """Out-of-fold probability matrix, one column per base learner.

    Row i of column j comes from a copy of learner j trained on every
    fold except row i's, using seed derive(base_j.seed, fold). The
    ``fitter`` seam exists so tests can substitute instrumented
    learners; it must match ``learners.fit``'s contract.
    """
    X = validate_matrix(X)
    y = validate_labels(np.asarray(y), X.shape[0])
    plan = make_stratified_folds(y, spec.n_folds, seed=derive_seed(spec.seed, "folds"))
    M = np.zeros((X.shape[0], len(spec.base)), dtype=np.float64)
    for fold in range(spec.n_folds):
        tr = plan.complement_indices(fold)
        te = plan.fold_indices(fold)
        for j, base in enumerate(spec.base):
            fold_spec = dataclasses.replace(base, seed=_fold_seed(base, fold))
            try:
                model = fitter(fold_spec, X[tr], y[tr])
            except StackgenError as exc:
                raise FoldFitFailure(base.algorithm, fold, exc) from exc
            M[te, j] = model.predict_proba(X[te])
    return M, plan


def _fit_meta(meta_spec: LearnerSpec, meta_features: np.ndarray, y, fitter):
    """Phase 2. Deliberately receives only the meta-features, never X."""
    try:
        return fitter(meta_spec, meta_features, y)
    except StackgenError as exc:
        raise FoldFitFailure(meta_spec.algorithm, "meta", exc) from exc


@dataclass(frozen=True)
class StackModel:
    """Fitted stack: full-data base refits plus the meta combiner."""

    spec: StackSpec
    base_models: tuple
    meta_model: object
    fold_plan: FoldPlan

    def base_probabilities(self, X) -> np.ndarray:
        """n_rows x n_base matrix of the refit base learners' outputs."""
        return np.column_stack([m.predict_proba(X) for m in self.base_models])

    def predict_proba(self, X) -> np.ndarray:
        B = self.base_probabilities(X)
        if self.spec.logit_meta_inputs:
            B = _logit(B)
        return self.meta_model.predict_proba(B)

    def to_doc(self) -> dict:
        return {
            "format": STACK_FORMAT,
            "version": STACK_VERSION,
            "spec": self.spec.to_doc(),
            "base_models": [learners.model_to_doc(m) for m in self.base_models],
            "meta_model": learners.model_to_doc(self.meta_model),
            "fold_assignments": self.fold_plan.assignments.tolist(),
            "fold_seed": self.fold_plan.seed,
            "fold_stratified": self.fold_plan.stratified,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "StackModel":
        if doc.get("format") != STACK_FORMAT or doc.get("version") != STACK_VERSION:
            raise ValueError(f"not a {STACK_FORMAT} v{STACK_VERSION} document")
        spec = StackSpec.from_doc(doc["spec"])
        plan = FoldPlan(
            n_folds=spec.n_folds,
            assignments=np.asarray(doc["fold_assignments"], dtype=np.int64),
            stratified=doc["fold_stratified"],
            seed=doc["fold_seed"],
        )
        return cls(
            spec=spec,
            base_models=tuple(learners.model_from_doc(d) for d in doc["base_models"]),
            meta_model=learners.model_from_doc(doc["meta_model"]),
            fold_plan=plan,
        )


def fit_stack(spec: StackSpec, X, y, fitter=learners.fit) -> StackModel:
    """Build meta-features, fit the meta-learner on them, refit bases."""
    X = validate_matrix(X)
    y = validate_labels(np.asarray(y), X.shape[0])
    M, plan = build_meta_features(spec, X, y, fitter)
    if spec.logit_meta_inputs:
        M = _logit(M)
    meta_model = _fit_meta(spec.meta, M, y, fitter)
    base_models = []
    for base in spec.base:
        try:
            base_models.append(fitter(base, X, y))
        except StackgenError as exc:
            raise FoldFitFailure(base.algorithm, "full", exc) from exc
    return StackModel(spec=spec, base_models=tuple(base_models),
                      meta_model=meta_model, fold_plan=plan)


def predict_stack(model: StackModel, X) -> np.ndarray:
    """Final class-1 probability for each row."""
    return model.predict_proba(X)
