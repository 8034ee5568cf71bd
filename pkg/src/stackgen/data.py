"""Core numeric types and experimental-design helpers.

Everything downstream (learners, stacking, the CLI) works in terms of
the small immutable containers defined here: a ``Dataset`` pairing a
dense float64 feature matrix with a 0/1 label vector, and a ``FoldPlan``
recording a cross-validation assignment. All randomness flows from one
experiment seed through :func:`derive_seed`, so serial and parallel
schedules agree bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadFoldCount,
    DegenerateSplit,
    DimensionMismatch,
    NonFiniteInput,
    TooFewSamplesPerClass,
)

__all__ = [
    "Dataset",
    "FoldPlan",
    "derive_seed",
    "make_rng",
    "make_stratified_folds",
    "split_indices",
    "train_test_split",
    "validate_matrix",
    "validate_labels",
]


def derive_seed(parent: int, tag: str) -> int:
    """Deterministic child seed: SHA-256 of the parent seed plus a purpose tag.

    Child streams for different tags are independent, and the derivation
    is stable across platforms and process layouts, which is what makes
    fold-parallel and serial runs reproduce each other.
    """
    digest = hashlib.sha256(
        int(parent).to_bytes(8, "little", signed=False) + tag.encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    """The one RNG constructor used package-wide (PCG64 stream)."""
    return np.random.Generator(np.random.PCG64(seed & (2**64 - 1)))


def validate_matrix(X: np.ndarray, name: str = "X") -> np.ndarray:
    """Coerce to a C-contiguous float64 2-D matrix with finite entries."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise NonFiniteInput(f"{name} contains NaN or infinite entries")
    return X


def validate_labels(y: np.ndarray, n_rows: int | None = None) -> np.ndarray:
    """Coerce to an int8 vector of {0, 1}; optionally check the row pairing."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise DimensionMismatch(f"labels must be 1-D, got shape {y.shape}")
    vals = np.unique(y)
    if not np.isin(vals, (0, 1)).all():
        raise DimensionMismatch(f"labels must all be 0 or 1, got values {vals!r}")
    if n_rows is not None and len(y) != n_rows:
        raise DimensionMismatch(f"{len(y)} labels for {n_rows} rows")
    return y.astype(np.int8)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """A feature matrix, its binary labels and the emitted column names.

    ``X`` is row-major float64 with one row per sample; every entry is
    finite. ``y`` holds one 0/1 label per row.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = validate_matrix(self.X)
        y = validate_labels(self.y, X.shape[0])
        if len(self.feature_names) != X.shape[1]:
            raise DimensionMismatch(
                f"{len(self.feature_names)} names for {X.shape[1]} columns"
            )
        object.__setattr__(self, "X", _freeze(X))
        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    def take(self, idx: np.ndarray) -> "Dataset":
        """Row subset as a new Dataset (order follows ``idx``)."""
        return Dataset(self.X[idx], self.y[idx], self.feature_names, self.notes)


@dataclass(frozen=True)
class FoldPlan:
    """Per-sample fold assignment for k-fold cross-validation."""

    n_folds: int
    assignments: np.ndarray  # fold index per sample, values in [0, n_folds)
    stratified: bool
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        object.__setattr__(self, "assignments", _freeze(a))

    def fold_indices(self, fold: int) -> np.ndarray:
        """Row indices belonging to ``fold``."""
        return np.flatnonzero(self.assignments == fold)

    def complement_indices(self, fold: int) -> np.ndarray:
        """Row indices outside ``fold`` (the training side for that fold)."""
        return np.flatnonzero(self.assignments != fold)


def _class_fold_sizes(n_class: int, n_folds: int, from_front: bool) -> np.ndarray:
    """Balanced per-fold allocation of one class's samples.

    Remainder samples go to the lowest fold numbers for one class and to
    the highest for the other, which keeps total fold sizes within one
    sample of each other.
    """
    sizes = np.full(n_folds, n_class // n_folds, dtype=np.int64)
    rem = n_class % n_folds
    if rem:
        if from_front:
            sizes[:rem] += 1
        else:
            sizes[n_folds - rem:] += 1
    return sizes


def make_stratified_folds(
    labels: np.ndarray,
    n_folds: int,
    seed: int,
    stratified: bool = True,
) -> FoldPlan:
    """Assign every sample to one of ``n_folds`` folds.

    With ``stratified`` (the default) each fold's class-1 count is within
    one sample of the globally proportional share. The assignment is a
    pure function of ``(labels, n_folds, seed)``.
    """
    y = validate_labels(np.asarray(labels))
    n = len(y)
    if n_folds < 2:
        raise BadFoldCount(f"need at least 2 folds, got {n_folds}")
    counts = np.bincount(y, minlength=2)
    if counts.min() < n_folds:
        raise TooFewSamplesPerClass(
            f"every class needs >= {n_folds} samples, got counts {counts.tolist()}"
        )

    rng = make_rng(seed)
    assignments = np.empty(n, dtype=np.int64)
    if stratified:
        for cls in (0, 1):
            idx = rng.permutation(np.flatnonzero(y == cls))
            sizes = _class_fold_sizes(len(idx), n_folds, from_front=(cls == 1))
            stops = np.cumsum(sizes)
            start = 0
            for fold, stop in enumerate(stops):
                assignments[idx[start:stop]] = fold
                start = stop
    else:
        idx = rng.permutation(n)
        sizes = _class_fold_sizes(n, n_folds, from_front=True)
        stops = np.cumsum(sizes)
        start = 0
        for fold, stop in enumerate(stops):
            assignments[idx[start:stop]] = fold
            start = stop
    return FoldPlan(n_folds=n_folds, assignments=assignments, stratified=stratified, seed=seed)


def _per_class_test_counts(counts: np.ndarray, n_test: int, n: int) -> np.ndarray:
    """Largest-remainder apportionment of the test rows over the two classes."""
    base = (n_test * counts) // n
    rem = (n_test * counts) % n
    deficit = n_test - int(base.sum())
    order = np.argsort(-rem, kind="stable")  # bigger fractional part first
    take = base.copy()
    for i in range(deficit):
        take[order[i]] += 1
    return take


def split_indices(
    labels: np.ndarray,
    n_test: int,
    seed: int,
    stratified: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive (train, test) row-index partition.

    The stratified form keeps each side's class proportions within one
    sample of the global proportions and refuses splits that would leave
    either side empty or missing a class.
    """
    y = validate_labels(np.asarray(labels))
    n = len(y)
    if not 0 < n_test < n:
        raise DegenerateSplit(f"test size {n_test} not in (0, {n})")

    rng = make_rng(seed)
    if stratified:
        counts = np.bincount(y, minlength=2)
        take = _per_class_test_counts(counts, n_test, n)
        if (take < 1).any() or (counts - take < 1).any():
            raise DegenerateSplit(
                f"stratified split of {n_test}/{n} leaves a side without one class "
                f"(class counts {counts.tolist()}, test share {take.tolist()})"
            )
        test_parts, train_parts = [], []
        for cls in (0, 1):
            idx = rng.permutation(np.flatnonzero(y == cls))
            test_parts.append(idx[: take[cls]])
            train_parts.append(idx[take[cls]:])
        test_idx = np.sort(np.concatenate(test_parts))
        train_idx = np.sort(np.concatenate(train_parts))
    else:
        perm = rng.permutation(n)
        test_idx = np.sort(perm[:n_test])
        train_idx = np.sort(perm[n_test:])
    return train_idx, test_idx


def train_test_split(
    dataset: Dataset,
    test_fraction: float,
    stratified: bool = True,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Partition a Dataset into (train, test) by a test-side fraction.

    The test side gets ``ceil(n_rows * test_fraction)`` rows, so a 0.1
    fraction of 541 rows yields a 55-row test set.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DegenerateSplit(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.ceil(dataset.n_rows * test_fraction))
    train_idx, test_idx = split_indices(dataset.y, n_test, seed, stratified)
    return dataset.take(train_idx), dataset.take(test_idx)
