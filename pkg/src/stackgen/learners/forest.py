"""Random forest of CART gini trees.

Each tree is grown by the kernel backend on its own bootstrap sample
(size n), considering sqrt(d) features per split, depth capped at 10,
leaves holding at least ceil(min_leaf_fraction * n) samples. The class-1
probability is the mean over trees of the leaf class-1 fraction. Tree
seeds derive from the learner seed, so the forest is reproducible and
trees are independent of how many run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..data import derive_seed
from .base import (
    LearnerSpec,
    check_fit_inputs,
    check_predict_input,
    decode_array,
    encode_array,
    model_envelope,
    open_envelope,
)

# parallel node arrays per tree, in storage order
TREE_FIELDS = ("feature", "threshold", "left", "right", "value", "count")


def tree_apply(tree: tuple, X: np.ndarray) -> np.ndarray:
    """Leaf value for every row: iterative level-synchronous descent."""
    feature, threshold, left, right, value, _ = tree
    cur = np.zeros(len(X), dtype=np.int64)
    while True:
        f = feature[cur]
        active = np.flatnonzero(f >= 0)
        if active.size == 0:
            break
        nodes = cur[active]
        go_left = X[active, feature[nodes]] <= threshold[nodes]
        cur[active] = np.where(go_left, left[nodes], right[nodes])
    return value[cur]


@dataclass(frozen=True)
class ForestModel:
    algorithm = "random_forest"

    spec: LearnerSpec
    trees: tuple  # tuple of TREE_FIELDS array tuples
    n_features: int
    min_leaf: int
    max_features_used: int

    def __post_init__(self):
        for tree in self.trees:
            for a in tree:
                a.setflags(write=False)

    def predict_proba(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        total = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees:
            total += tree_apply(tree, X)
        return total / len(self.trees)

    def to_doc(self) -> dict:
        return model_envelope(self.algorithm, self.spec, {
            "n_features": self.n_features,
            "min_leaf": self.min_leaf,
            "max_features_used": self.max_features_used,
            "trees": [
                {name: encode_array(arr) for name, arr in zip(TREE_FIELDS, tree)}
                for tree in self.trees
            ],
        })


def fit(spec: LearnerSpec, X, y) -> ForestModel:
    X, y8 = check_fit_inputs(X, y)
    n, d = X.shape
    n_trees = spec.param("n_trees")
    max_depth = spec.param("max_depth")
    min_leaf = max(1, math.ceil(spec.param("min_leaf_fraction") * n))
    mf = spec.param("max_features")
    max_features = max(1, math.isqrt(d)) if mf == "sqrt" else min(int(mf), d)

    y64 = y8.astype(np.int64)
    trees = []
    for i in range(n_trees):
        tree_seed = derive_seed(spec.seed, f"tree-{i}")
        trees.append(_kernels.grow_tree(
            X, y64, tree_seed, max_depth, min_leaf, max_features, bootstrap=True
        ))
    return ForestModel(
        spec=spec,
        trees=tuple(trees),
        n_features=d,
        min_leaf=min_leaf,
        max_features_used=max_features,
    )


def from_doc(doc: dict) -> ForestModel:
    spec, fitted = open_envelope(doc, "random_forest")
    trees = tuple(
        tuple(decode_array(td[name]) for name in TREE_FIELDS)
        for td in fitted["trees"]
    )
    return ForestModel(
        spec=spec,
        trees=trees,
        n_features=int(fitted["n_features"]),
        min_leaf=int(fitted["min_leaf"]),
        max_features_used=int(fitted["max_features_used"]),
    )
