"""CART decision tree: exhaustive Gini split search, cross-validated tuning,
text rendering, and deterministic serialization.

Split thresholds are always midpoints between consecutive distinct sorted
feature values, never observed values, so <=/> routing is unambiguous on
training data. A split with zero impurity reduction is still taken when a
valid midpoint exists (XOR-style data needs two levels before any gain
shows up); the search only gives up on pure nodes or featureless ones.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ..preprocess import LabeledDataset
from .kernels import best_split_kernel, route_tree_kernel


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when set")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class TreeNode:
    """Internal node (feature_index, threshold, children) or leaf; counts kept on every node."""

    class_counts: tuple[int, int]
    feature_index: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None

    @property
    def predicted_class(self) -> int:
        # argmax with ties resolved to the lower class index
        return 1 if self.class_counts[1] > self.class_counts[0] else 0


@dataclass
class DecisionTreeModel:
    root: TreeNode
    params: TreeParams
    feature_names: tuple[str, ...]
    _flat: Optional[tuple] = field(default=None, repr=False, compare=False)

    def flattened(self) -> tuple:
        """Preorder parallel-array form consumed by the routing kernel."""
        if self._flat is None:
            feats: list[int] = []
            thrs: list[float] = []
            lefts: list[int] = []
            rights: list[int] = []
            values: list[int] = []

            def add(node: TreeNode) -> int:
                i = len(feats)
                feats.append(-1 if node.is_leaf else node.feature_index)
                thrs.append(0.0 if node.is_leaf else node.threshold)
                lefts.append(-1)
                rights.append(-1)
                values.append(node.predicted_class if node.is_leaf else -1)
                if not node.is_leaf:
                    lefts[i] = add(node.left)
                    rights[i] = add(node.right)
                return i

            add(self.root)
            self._flat = (
                np.asarray(feats, dtype=np.int64),
                np.asarray(thrs, dtype=np.float64),
                np.asarray(lefts, dtype=np.int64),
                np.asarray(rights, dtype=np.int64),
                np.asarray(values, dtype=np.int64),
            )
        return self._flat


@dataclass(frozen=True)
class SplitChoice:
    feature_index: int
    threshold: float
    weighted_child_impurity: float


def gini(class_counts: Sequence[int]) -> float:
    """Gini impurity 1 - sum(p_k^2); 0 for a pure node, 0.5 at worst for 2 classes."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0 or (counts < 0).any():
        raise ValueError("class counts must be non-negative and sum to a positive total")
    p = counts / total
    return float(1.0 - (p * p).sum())


def best_split(ds: LabeledDataset) -> Optional[SplitChoice]:
    """Best (feature, midpoint) split by weighted child Gini, or None.

    Ties break toward the lower feature index, then the lower threshold.
    None when the node is pure or every feature is constant.
    """
    if len(ds) < 2:
        raise ValueError("need at least 2 rows to search for a split")
    feats = np.arange(ds.n_features, dtype=np.int64)
    found, j, thr, impurity = best_split_kernel(ds.features, ds.labels, feats)
    if not found:
        return None
    return SplitChoice(int(j), float(thr), float(impurity))


def _class_counts(y: np.ndarray) -> tuple[int, int]:
    ones = int(np.count_nonzero(y))
    return (y.shape[0] - ones, ones)


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    depth: int,
    params: TreeParams,
    rng: Optional[np.random.Generator],
    max_features: Optional[int],
) -> TreeNode:
    counts = _class_counts(y)
    if counts[0] == 0 or counts[1] == 0:
        return TreeNode(class_counts=counts)
    if params.max_depth is not None and depth >= params.max_depth:
        return TreeNode(class_counts=counts)
    if X.shape[0] < params.min_samples_split:
        return TreeNode(class_counts=counts)
    n_features = X.shape[1]
    if rng is not None and max_features is not None and max_features < n_features:
        feats = np.sort(rng.choice(n_features, size=max_features, replace=False)).astype(np.int64)
    else:
        feats = np.arange(n_features, dtype=np.int64)
    found, j, thr, _ = best_split_kernel(X, y, feats)
    if not found:
        return TreeNode(class_counts=counts)
    mask = X[:, j] <= thr
    n_left = int(np.count_nonzero(mask))
    if n_left < params.min_samples_leaf or X.shape[0] - n_left < params.min_samples_leaf:
        return TreeNode(class_counts=counts)
    left = _grow(X[mask], y[mask], depth + 1, params, rng, max_features)
    right = _grow(X[~mask], y[~mask], depth + 1, params, rng, max_features)
    return TreeNode(class_counts=counts, feature_index=int(j), threshold=float(thr), left=left, right=right)


def build_tree(
    train: LabeledDataset,
    params: TreeParams | None = None,
    rng: Optional[np.random.Generator] = None,
    max_features: Optional[int] = None,
) -> DecisionTreeModel:
    """Recursive CART fit; deterministic for fixed input (and fixed rng state).

    ``rng``/``max_features`` restrict each node's split search to a random
    feature subset; the forest passes them, a plain fit leaves them unset.
    """
    if len(train) == 0:
        raise ValueError("cannot build a tree from an empty training set")
    params = params or TreeParams()
    root = _grow(train.features, train.labels, 0, params, rng, max_features)
    return DecisionTreeModel(root=root, params=params, feature_names=train.feature_names)


def predict_tree(model: DecisionTreeModel, feature_row: Sequence[float]) -> int:
    """Route one row: left when value <= threshold, right otherwise."""
    row = np.asarray(feature_row, dtype=np.float64)
    if row.shape != (len(model.feature_names),):
        raise ValueError(f"expected {len(model.feature_names)} feature values, got shape {row.shape}")
    node = model.root
    while not node.is_leaf:
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return node.predicted_class


def predict_tree_batch(model: DecisionTreeModel, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ValueError("feature matrix width does not match the model")
    return route_tree_kernel(*model.flattened(), X)


# -- hyperparameter tuning ----------------------------------------------------


def default_param_grid() -> list[TreeParams]:
    """Depth None plus 1..10 crossed with min_samples_leaf {1, 2, 5, 10}."""
    depths: list[Optional[int]] = [None] + list(range(1, 11))
    return [
        TreeParams(max_depth=d, min_samples_leaf=leaf)
        for d in depths
        for leaf in (1, 2, 5, 10)
    ]


def _cv_folds(labels: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified k-fold indices; unstratified (with a warning) when a
    class has fewer members than folds."""
    rng = np.random.default_rng(seed)
    n = labels.shape[0]
    counts = np.bincount(labels, minlength=2)
    if counts.min() < folds:
        warnings.warn(
            f"class stratum smaller than {folds} folds; falling back to unstratified folds",
            stacklevel=3,
        )
        return [f for f in np.array_split(rng.permutation(n), folds) if f.size > 0]
    parts: list[list[int]] = [[] for _ in range(folds)]
    for cls in (0, 1):
        idx = np.nonzero(labels == cls)[0]
        rng.shuffle(idx)
        for i, ix in enumerate(idx):
            parts[i % folds].append(int(ix))
    return [np.asarray(p, dtype=np.int64) for p in parts]


def _cv_accuracy(ds: LabeledDataset, params: TreeParams, fold_indices: list[np.ndarray]) -> float:
    accuracies = []
    all_idx = np.arange(len(ds))
    for test_idx in fold_indices:
        train_idx = np.setdiff1d(all_idx, test_idx, assume_unique=False)
        model = build_tree(ds.take(train_idx), params)
        pred = predict_tree_batch(model, ds.features[test_idx])
        accuracies.append(float((pred == ds.labels[test_idx]).mean()))
    return float(np.mean(accuracies))


def tune_tree(
    train: LabeledDataset,
    grid: Iterable[TreeParams] | None = None,
    folds: int = 5,
    seed: int = 0,
) -> tuple[TreeParams, DecisionTreeModel]:
    """k-fold cross-validated grid search; refits on the full train set.

    Accuracy ties prefer the simpler tree: smaller max_depth (None counts
    as unbounded, i.e. largest), then larger min_samples_leaf.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    grid = list(grid) if grid is not None else default_param_grid()
    if not grid:
        raise ValueError("parameter grid must not be empty")
    folds = min(folds, len(train))
    fold_indices = _cv_folds(train.labels, folds, seed)
    best_key: tuple | None = None
    best_params = grid[0]
    for params in grid:
        accuracy = _cv_accuracy(train, params, fold_indices)
        depth_rank = params.max_depth if params.max_depth is not None else math.inf
        key = (-accuracy, depth_rank, -params.min_samples_leaf)
        if best_key is None or key < best_key:
            best_key = key
            best_params = params
    return best_params, build_tree(train, best_params)


# -- rendering and serialization ----------------------------------------------


def render_tree_text(model: DecisionTreeModel) -> str:
    """Indented text form, one line per node; depth shown by repeated ``|   ``.

    Thresholds print with repr so structurally different trees always
    render differently.
    """
    lines: list[str] = []

    def walk(node: TreeNode, depth: int) -> None:
        pad = "|   " * depth
        if node.is_leaf:
            c0, c1 = node.class_counts
            lines.append(f"{pad}|--- class: {node.predicted_class} (counts: [{c0}, {c1}])")
            return
        name = model.feature_names[node.feature_index]
        lines.append(f"{pad}|--- {name} <= {node.threshold!r}")
        walk(node.left, depth + 1)
        lines.append(f"{pad}|--- {name} > {node.threshold!r}")
        walk(node.right, depth + 1)

    walk(model.root, 0)
    return "\n".join(lines) + "\n"


def _nodes_preorder(root: TreeNode) -> list[dict]:
    nodes: list[dict] = []

    def walk(node: TreeNode) -> None:
        nodes.append(
            {
                "feature_index": node.feature_index,
                "threshold": node.threshold,
                "class_counts": list(node.class_counts),
                "predicted_class": node.predicted_class if node.is_leaf else None,
            }
        )
        if not node.is_leaf:
            walk(node.left)
            walk(node.right)

    walk(root)
    return nodes


def serialize_tree(model: DecisionTreeModel) -> dict:
    """Deterministic JSON-ready document: params, feature names, preorder nodes."""
    return {
        "feature_names": list(model.feature_names),
        "params": {
            "max_depth": model.params.max_depth,
            "min_samples_split": model.params.min_samples_split,
            "min_samples_leaf": model.params.min_samples_leaf,
        },
        "nodes": _nodes_preorder(model.root),
    }


def tree_from_document(doc: dict) -> DecisionTreeModel:
    """Inverse of :func:`serialize_tree`."""
    nodes = doc["nodes"]
    pos = 0

    def read() -> TreeNode:
        nonlocal pos
        raw = nodes[pos]
        pos += 1
        counts = (int(raw["class_counts"][0]), int(raw["class_counts"][1]))
        if raw["feature_index"] is None:
            return TreeNode(class_counts=counts)
        left = read()
        right = read()
        return TreeNode(
            class_counts=counts,
            feature_index=int(raw["feature_index"]),
            threshold=float(raw["threshold"]),
            left=left,
            right=right,
        )

    root = read()
    params = TreeParams(
        max_depth=doc["params"]["max_depth"],
        min_samples_split=doc["params"]["min_samples_split"],
        min_samples_leaf=doc["params"]["min_samples_leaf"],
    )
    return DecisionTreeModel(root=root, params=params, feature_names=tuple(doc["feature_names"]))


def model_digest(model: DecisionTreeModel) -> str:
    """Stable hash of the tree structure (preorder nodes, canonical JSON)."""
    canonical = json.dumps(_nodes_preorder(model.root), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
