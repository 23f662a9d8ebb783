"""Turns a sink snapshot into a model-ready numeric dataset.

Null-row removal, feature selection (Age and EstimatedSalary against the
purchase label), a seeded reproducible train/test split, standardization
fitted on training data only, and optional equal-width discretization.
All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from .records import CustomerRecord, ValidationError, record_from_mapping
from .sink import DatasetSnapshot

FEATURE_NAMES = ("Age", "EstimatedSalary")


class DegenerateSplitError(ValueError):
    """A split spec would leave the train or test part empty."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix (n_rows x n_features, float64) plus 0/1 label vector."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError("labels length must match feature row count")
        if features.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length must match feature column count")
        if not np.isfinite(features).all():
            raise ValueError("features must not contain missing values")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(self.features[indices], self.labels[indices], self.feature_names)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")


@dataclass(frozen=True)
class Standardizer:
    """Per-feature means and population standard deviations, fitted on train only."""

    means: np.ndarray
    std_devs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", np.asarray(self.means, dtype=np.float64))
        object.__setattr__(self, "std_devs", np.asarray(self.std_devs, dtype=np.float64))
        if self.means.shape != self.std_devs.shape or self.means.ndim != 1:
            raise ValueError("means and std_devs must be matching 1-D vectors")
        if (self.std_devs < 0).any():
            raise ValueError("std_devs must be non-negative")


def drop_incomplete(raw_rows: Iterable[CustomerRecord | Mapping[str, Any]]) -> tuple[list[CustomerRecord], int]:
    """Remove rows containing missing or unparseable values.

    Survivors keep their order and values untouched; the second element is
    the dropped count.
    """
    clean: list[CustomerRecord] = []
    dropped = 0
    for row in raw_rows:
        if isinstance(row, CustomerRecord):
            clean.append(row)
            continue
        try:
            clean.append(record_from_mapping(row))
        except ValidationError:
            dropped += 1
    return clean, dropped


def select_features(snapshot: DatasetSnapshot | Iterable[CustomerRecord]) -> LabeledDataset:
    """Project records to the (Age, EstimatedSalary) feature matrix and purchase labels.

    user_id and gender are excluded by design.
    """
    rows = list(snapshot.rows) if isinstance(snapshot, DatasetSnapshot) else list(snapshot)
    if not rows:
        raise ValueError("cannot select features from an empty snapshot")
    features = np.array([[r.age, r.estimated_salary] for r in rows], dtype=np.float64)
    labels = np.array([r.purchased for r in rows], dtype=np.int64)
    return LabeledDataset(features, labels, FEATURE_NAMES)


def train_test_split(ds: LabeledDataset, spec: SplitSpec = SplitSpec()) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded pseudo-random partition into (train, test).

    Row indices are permuted with NumPy's default PCG64 generator
    (``np.random.default_rng(spec.seed).permutation(n)``); the first
    ``ceil(n * test_fraction)`` permuted indices form the test set and the
    rest the train set, both kept in permutation order. Deterministic for
    a fixed seed.
    """
    n = len(ds)
    if n < 2:
        raise DegenerateSplitError("need at least 2 rows to split")
    n_test = math.ceil(n * spec.test_fraction)
    if n_test <= 0 or n_test >= n:
        raise DegenerateSplitError(f"test_fraction {spec.test_fraction} leaves an empty part for n={n}")
    order = np.random.default_rng(spec.seed).permutation(n)
    return ds.take(order[n_test:]), ds.take(order[:n_test])


def fit_standardizer(train: LabeledDataset) -> Standardizer:
    """Column means and population (ddof=0) standard deviations of the train set."""
    if len(train) == 0:
        raise ValueError("cannot fit a standardizer on an empty dataset")
    return Standardizer(means=train.features.mean(axis=0), std_devs=train.features.std(axis=0))


def transform(ds: LabeledDataset, standardizer: Standardizer) -> LabeledDataset:
    """Map each value x to (x - mean) / std; zero-variance columns map to all zeros."""
    if standardizer.means.shape[0] != ds.n_features:
        raise ValueError("standardizer dimension does not match dataset")
    std = standardizer.std_devs
    safe = np.where(std == 0.0, 1.0, std)
    scaled = (ds.features - standardizer.means) / safe
    scaled[:, std == 0.0] = 0.0
    return LabeledDataset(scaled, ds.labels, ds.feature_names)


def discretize(ds: LabeledDataset, bins: int) -> LabeledDataset:
    """Equal-width binning per feature into indices 0..bins-1.

    Bin edges come from each column's min/max with half-open
    ``[min + k*w, min + (k+1)*w)`` intervals; the column maximum clamps
    into the top bin and constant columns map to bin 0.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if len(ds) == 0:
        raise ValueError("cannot discretize an empty dataset")
    lo = ds.features.min(axis=0)
    hi = ds.features.max(axis=0)
    width = (hi - lo) / bins
    safe = np.where(width == 0.0, 1.0, width)
    idx = np.floor((ds.features - lo) / safe)
    idx = np.clip(idx, 0, bins - 1)
    idx[:, width == 0.0] = 0.0
    return LabeledDataset(idx, ds.labels, ds.feature_names)
