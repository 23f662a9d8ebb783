"""Metrics: confusion matrix, per-class table, averages, error statistics,
and the plain-text report rendering."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warden.evaluation import (
    AverageMetrics,
    ClassMetrics,
    ConfusionMatrix,
    EvaluationReport,
    confusion,
    errors_from_predictions,
    evaluate_predictions,
    render_report_text,
    report,
)

REFERENCE = ConfusionMatrix(cells=((61, 4), (7, 48)))


def two_decimals(m: ClassMetrics) -> list[str]:
    return [f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}"]


# -- reference matrix ---------------------------------------------------------------


def test_reference_per_class_metrics():
    rep = report(REFERENCE)
    assert two_decimals(rep.per_class[0]) == ["0.90", "0.94", "0.92"]
    assert rep.per_class[0].support == 65
    assert two_decimals(rep.per_class[1]) == ["0.92", "0.87", "0.90"]
    assert rep.per_class[1].support == 55
    assert rep.zero_division_flags == ()


def test_reference_accuracy_and_errors_to_ten_digits():
    rep = report(REFERENCE)
    assert f"{rep.accuracy:.10g}" == "0.9083333333"
    assert f"{rep.mae:.10g}" == "0.09166666667"
    assert f"{rep.mse:.10g}" == "0.09166666667"
    assert f"{rep.rmse:.10g}" == "0.3027650354"
    assert rep.mae == rep.mse
    assert rep.rmse == math.sqrt(rep.mse)


def test_confusion_matrix_accessors():
    assert REFERENCE.total == 120
    assert REFERENCE.trace == 109
    assert REFERENCE.row_sum(0) == 65 and REFERENCE.row_sum(1) == 55
    assert REFERENCE.column_sum(0) == 68 and REFERENCE.column_sum(1) == 52
    assert REFERENCE.as_array().tolist() == [[61, 4], [7, 48]]


# -- construction and validation -------------------------------------------------------


def test_confusion_from_predictions():
    got = confusion([0, 0, 1, 1, 1], [0, 1, 1, 1, 0])
    assert got.cells == ((1, 1), (1, 2))


def test_confusion_rejects_bad_input():
    with pytest.raises(ValueError, match="y_true"):
        confusion([0, 2], [0, 1])
    with pytest.raises(ValueError, match="y_pred"):
        confusion([0, 1], [0, -1])
    with pytest.raises(ValueError, match="length mismatch"):
        confusion([0, 1, 1], [0, 1])
    with pytest.raises(ValueError, match="empty"):
        confusion([], [])


def test_matrix_cell_validation():
    with pytest.raises(ValueError):
        ConfusionMatrix(cells=((1, 2), (3, 4), (5, 6)))
    with pytest.raises(ValueError):
        ConfusionMatrix(cells=((1, -2), (3, 4)))
    with pytest.raises(ValueError):
        ConfusionMatrix(cells=((1, 2.0), (3, 4)))
    with pytest.raises(ValueError):
        ConfusionMatrix(cells=((True, 2), (3, 4)))


def test_report_rejects_empty_matrix():
    with pytest.raises(ValueError):
        report(ConfusionMatrix(cells=((0, 0), (0, 0))))


# -- metric behavior ----------------------------------------------------------------


def test_perfect_predictions():
    rep = report(ConfusionMatrix(cells=((6, 0), (0, 4))))
    assert rep.accuracy == 1.0
    for m in rep.per_class:
        assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)
    assert rep.mae == rep.mse == rep.rmse == 0.0
    assert rep.zero_division_flags == ()


def test_transpose_swaps_precision_and_recall():
    rep = report(REFERENCE)
    swapped = report(ConfusionMatrix(cells=((61, 7), (4, 48))))
    for k in (0, 1):
        assert swapped.per_class[k].precision == rep.per_class[k].recall
        assert swapped.per_class[k].recall == rep.per_class[k].precision
    assert swapped.accuracy == rep.accuracy


def test_one_wrong_out_of_four():
    errors = errors_from_predictions([0, 0, 1, 1], [0, 0, 1, 0])
    assert errors.mae == 0.25
    assert errors.mse == 0.25
    assert errors.rmse == 0.5


def test_report_is_pure():
    assert report(REFERENCE) == report(REFERENCE)
    assert report(REFERENCE) is not report(REFERENCE)


def test_never_predicted_class_flags_precision():
    rep = evaluate_predictions([0, 1], [0, 0])
    assert rep.per_class[1].precision == 0.0
    assert rep.per_class[1].f1 == 0.0
    assert rep.zero_division_flags == (
        "precision undefined for class 1 (never predicted); reported as 0",
    )


def test_no_true_samples_flags_recall():
    rep = evaluate_predictions([1, 1, 1], [0, 1, 1])
    assert rep.per_class[0].recall == 0.0
    assert rep.zero_division_flags == (
        "recall undefined for class 0 (no true samples); reported as 0",
    )


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200))
def test_hard_label_error_identity(pairs):
    y_true = [a for a, _ in pairs]
    y_pred = [b for _, b in pairs]
    rep = evaluate_predictions(y_true, y_pred)
    assert abs(rep.mae - (1.0 - rep.accuracy)) <= 1e-12
    assert rep.mse == rep.mae
    assert abs(rep.rmse - math.sqrt(rep.mse)) <= 1e-12
    direct = errors_from_predictions(y_true, y_pred)
    assert abs(direct.mae - rep.mae) <= 1e-12
    assert abs(direct.mse - rep.mse) <= 1e-12
    # support adds up and weighted averages stay inside the per-class range
    assert rep.per_class[0].support + rep.per_class[1].support == len(pairs)
    for attr in ("precision", "recall", "f1"):
        values = [getattr(rep.per_class[0], attr), getattr(rep.per_class[1], attr)]
        weighted = getattr(rep.weighted_avg, attr)
        macro = getattr(rep.macro_avg, attr)
        assert min(values) - 1e-12 <= weighted <= max(values) + 1e-12
        assert abs(macro - sum(values) / 2) <= 1e-12


# -- rendering ---------------------------------------------------------------------


def test_render_error_lines_are_full_precision():
    text = render_report_text(report(REFERENCE))
    lines = text.splitlines()
    assert lines[0] == "-----"
    assert lines[1] == "Mean Absolute Error: 0.09166666666666666"
    assert lines[3] == "Mean Squared Error: 0.09166666666666666"
    assert lines[5] == "Root Mean Squared Error: 0.30276503540974914"


def test_render_matrix_and_table():
    text = render_report_text(report(REFERENCE))
    assert "[[61  4]\n [ 7 48]]" in text
    lines = text.splitlines()
    assert "   precision    recall  f1-score   support" in lines[11]
    assert lines[13] == "           0      0.90      0.94      0.92        65"
    assert lines[14] == "           1      0.92      0.87      0.90        55"
    assert lines[16] == "    accuracy                          0.91       120"
    assert lines[17] == "   macro avg      0.91      0.91      0.91       120"
    assert lines[18] == "weighted avg      0.91      0.91      0.91       120"
    assert text.endswith("-----\n")
    assert text.count("-----") == 6


def test_render_is_deterministic():
    rep = report(REFERENCE)
    assert render_report_text(rep) == render_report_text(rep)
