"""From-scratch supervised learners: CART trees, tuning, and bagged forests."""

from .forest import ForestModel, ForestParams, build_forest, predict_forest, predict_forest_batch
from .kernels import active_backend
from .tree import (
    DecisionTreeModel,
    SplitChoice,
    TreeNode,
    TreeParams,
    best_split,
    build_tree,
    gini,
    model_digest,
    predict_tree,
    predict_tree_batch,
    render_tree_text,
    serialize_tree,
    tree_from_document,
    tune_tree,
)

__all__ = [
    "DecisionTreeModel",
    "ForestModel",
    "ForestParams",
    "SplitChoice",
    "TreeNode",
    "TreeParams",
    "active_backend",
    "best_split",
    "build_forest",
    "build_tree",
    "gini",
    "model_digest",
    "predict_forest",
    "predict_forest_batch",
    "predict_tree",
    "predict_tree_batch",
    "render_tree_text",
    "serialize_tree",
    "tree_from_document",
    "tune_tree",
]
