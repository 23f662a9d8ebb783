"""Random forest: bagged CART trees over random per-node feature subsets.

Tree t draws its generator from SeedSequence [seed, t], so any single tree
can be rebuilt without replaying the ones before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..preprocess import LabeledDataset
from .tree import DecisionTreeModel, TreeParams, build_tree, predict_tree, predict_tree_batch


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    bootstrap: bool = True
    max_features: int = 1
    seed: int = 0
    tree_params: TreeParams = TreeParams()

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features < 1:
            raise ValueError("max_features must be >= 1")


@dataclass
class ForestModel:
    trees: tuple[DecisionTreeModel, ...]
    params: ForestParams
    feature_names: tuple[str, ...]


def build_forest(train: LabeledDataset, params: ForestParams | None = None) -> ForestModel:
    if len(train) == 0:
        raise ValueError("cannot build a forest from an empty training set")
    params = params or ForestParams()
    max_features = min(params.max_features, train.n_features)
    n = len(train)
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng([params.seed, t])
        if params.bootstrap:
            sample = train.take(rng.integers(0, n, size=n))
        else:
            sample = train
        trees.append(build_tree(sample, params.tree_params, rng=rng, max_features=max_features))
    return ForestModel(trees=tuple(trees), params=params, feature_names=train.feature_names)


def predict_forest(model: ForestModel, feature_row: Sequence[float]) -> int:
    """Majority vote across trees; an exact tie goes to class 0."""
    votes = sum(predict_tree(tree, feature_row) for tree in model.trees)
    return 1 if 2 * votes > len(model.trees) else 0


def predict_forest_batch(model: ForestModel, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ValueError("feature matrix width does not match the model")
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in model.trees:
        votes += predict_tree_batch(tree, X)
    return (2 * votes > len(model.trees)).astype(np.int64)
