"""stackgen: stacked generalization for binary classification, from scratch.

Base learners (RBF-SVM, multilayer perceptron, random forest, k-nearest
neighbours) are trained per fold to produce out-of-fold probability
meta-features, and a logistic meta-classifier combines them. Numeric hot
loops live in :mod:`stackgen._kernels`, which transparently prefers a
compiled backend and falls back to pure Python.
"""

from .data import Dataset, FoldPlan, derive_seed, make_stratified_folds, train_test_split
from .errors import ConfigError, DataError, StackgenError, TrainingError
from .ingest import encode_and_impute, load_csv, prepare_split, standardize

__version__ = "0.1.0"

from .config import ExperimentConfig, default_config, load_config  # noqa: E402

__all__ = [
    "Dataset",
    "FoldPlan",
    "derive_seed",
    "make_stratified_folds",
    "train_test_split",
    "load_csv",
    "encode_and_impute",
    "standardize",
    "prepare_split",
    "ExperimentConfig",
    "default_config",
    "load_config",
    "StackgenError",
    "ConfigError",
    "DataError",
    "TrainingError",
    "__version__",
]
