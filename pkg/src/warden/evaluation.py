"""Binary classification metrics: confusion matrix, per-class precision,
recall, F1 and support, macro and weighted averages, and MAE/MSE/RMSE.

For hard 0/1 labels the error metrics collapse: MAE == MSE == 1 - accuracy
and RMSE == sqrt(MSE), so every error statistic is derivable from the
confusion matrix alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts; rows are true classes, columns are predicted classes."""

    cells: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self) -> None:
        if len(self.cells) != 2 or any(len(row) != 2 for row in self.cells):
            raise ValueError("confusion matrix must be 2x2")
        for row in self.cells:
            for cell in row:
                if not isinstance(cell, int) or isinstance(cell, bool) or cell < 0:
                    raise ValueError(f"matrix cells must be non-negative integers, got {cell!r}")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.cells)

    @property
    def trace(self) -> int:
        return self.cells[0][0] + self.cells[1][1]

    def row_sum(self, k: int) -> int:
        return self.cells[k][0] + self.cells[k][1]

    def column_sum(self, k: int) -> int:
        return self.cells[0][k] + self.cells[1][k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.cells, dtype=np.int64)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class AverageMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    matrix: ConfusionMatrix
    per_class: tuple[ClassMetrics, ClassMetrics]
    accuracy: float
    macro_avg: AverageMetrics
    weighted_avg: AverageMetrics
    mae: float
    mse: float
    rmse: float
    # populated when a precision or recall denominator was zero
    zero_division_flags: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class ErrorMetrics:
    mae: float
    mse: float
    rmse: float


def _as_binary_labels(values: Sequence[int], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 labels")
    return arr


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> ConfusionMatrix:
    """cells[i][j] counts samples with true class i predicted as j."""
    t = _as_binary_labels(y_true, "y_true")
    p = _as_binary_labels(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape[0]} true labels vs {p.shape[0]} predictions")
    cells = tuple(
        tuple(int(np.count_nonzero((t == i) & (p == j))) for j in (0, 1)) for i in (0, 1)
    )
    return ConfusionMatrix(cells=cells)


def report(matrix: ConfusionMatrix) -> EvaluationReport:
    """Full metric set from a confusion matrix; pure, so identical matrices
    yield identical reports.

    A class never predicted gets precision 0 and a zero-division flag
    instead of an exception; likewise recall when a class has no true
    samples.
    """
    total = matrix.total
    if total == 0:
        raise ValueError("cannot report on an empty confusion matrix")
    flags: list[str] = []
    per_class = []
    for k in (0, 1):
        col = matrix.column_sum(k)
        row = matrix.row_sum(k)
        if col == 0:
            flags.append(f"precision undefined for class {k} (never predicted); reported as 0")
            precision = 0.0
        else:
            precision = matrix.cells[k][k] / col
        if row == 0:
            flags.append(f"recall undefined for class {k} (no true samples); reported as 0")
            recall = 0.0
        else:
            recall = matrix.cells[k][k] / row
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        per_class.append(ClassMetrics(precision=precision, recall=recall, f1=f1, support=row))

    accuracy = matrix.trace / total
    macro = AverageMetrics(
        precision=(per_class[0].precision + per_class[1].precision) / 2,
        recall=(per_class[0].recall + per_class[1].recall) / 2,
        f1=(per_class[0].f1 + per_class[1].f1) / 2,
    )
    w0 = per_class[0].support / total
    w1 = per_class[1].support / total
    weighted = AverageMetrics(
        precision=w0 * per_class[0].precision + w1 * per_class[1].precision,
        recall=w0 * per_class[0].recall + w1 * per_class[1].recall,
        f1=w0 * per_class[0].f1 + w1 * per_class[1].f1,
    )
    mae = (total - matrix.trace) / total
    return EvaluationReport(
        matrix=matrix,
        per_class=(per_class[0], per_class[1]),
        accuracy=accuracy,
        macro_avg=macro,
        weighted_avg=weighted,
        mae=mae,
        mse=mae,
        rmse=math.sqrt(mae),
        zero_division_flags=tuple(flags),
    )


def errors_from_predictions(y_true: Sequence[int], y_pred: Sequence[int]) -> ErrorMetrics:
    t = _as_binary_labels(y_true, "y_true")
    p = _as_binary_labels(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape[0]} true labels vs {p.shape[0]} predictions")
    diff = np.abs(t - p)
    mae = float(diff.mean())
    mse = float((diff * diff).mean())
    return ErrorMetrics(mae=mae, mse=mse, rmse=math.sqrt(mse))


def evaluate_predictions(y_true: Sequence[int], y_pred: Sequence[int]) -> EvaluationReport:
    """Convenience composition: confusion then report."""
    return report(confusion(y_true, y_pred))


_SEP = "-----"


def render_report_text(rep: EvaluationReport) -> str:
    """Plain-text report: dashed separators, full-precision error lines, the
    matrix in numpy's display form, then the classification table with
    two-decimal fixed point."""
    lines = [
        _SEP,
        f"Mean Absolute Error: {rep.mae!r}",
        _SEP,
        f"Mean Squared Error: {rep.mse!r}",
        _SEP,
        f"Root Mean Squared Error: {rep.rmse!r}",
        _SEP,
        "",
    ]
    lines.extend(np.array2string(rep.matrix.as_array()).splitlines())
    lines.append(_SEP)
    head = f"{'':>12} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
    lines.append(head)
    lines.append("")
    for k in (0, 1):
        m = rep.per_class[k]
        lines.append(
            f"{k:>12} {m.precision:>9.2f} {m.recall:>9.2f} {m.f1:>9.2f} {m.support:>9d}"
        )
    lines.append("")
    total = rep.matrix.total
    lines.append(f"{'accuracy':>12} {'':>9} {'':>9} {rep.accuracy:>9.2f} {total:>9d}")
    for name, avg in (("macro avg", rep.macro_avg), ("weighted avg", rep.weighted_avg)):
        lines.append(
            f"{name:>12} {avg.precision:>9.2f} {avg.recall:>9.2f} {avg.f1:>9.2f} {total:>9d}"
        )
    lines.append(_SEP)
    return "\n".join(lines) + "\n"
