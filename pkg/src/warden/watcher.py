"""Retraining automation: watches for applied data changes, retrains the
miners once enough rows accumulate, and publishes immutable pattern
reports with artifacts on disk.

A report captures one retrain: the tuned tree (text + JSON + digest), its
evaluation on the held-out split, the companion forest's accuracy, and
the delta against the previously trained model. Retrains are single-entry;
change signals arriving mid-retrain accumulate and are evaluated after.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import shutil
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from .evaluation import (
    AverageMetrics,
    ClassMetrics,
    ConfusionMatrix,
    EvaluationReport,
    evaluate_predictions,
    render_report_text,
)
from .mining import (
    ForestParams,
    TreeParams,
    build_forest,
    model_digest,
    predict_forest_batch,
    predict_tree_batch,
    render_tree_text,
    serialize_tree,
    tune_tree,
)
from .preprocess import (
    DegenerateSplitError,
    SplitSpec,
    drop_incomplete,
    fit_standardizer,
    select_features,
    train_test_split,
    transform,
)
from .sink import DatasetSink, DatasetSnapshot
from .svgplot import render_decision_regions

logger = logging.getLogger(__name__)

DEFAULT_RETRAIN_THRESHOLD = 25
DEFAULT_EPSILON = 0.005


class RetrainInProgress(RuntimeError):
    """A second retrain was requested while one is running."""


@dataclass(frozen=True)
class PatternDelta:
    accuracy_change: float
    structure_changed: bool


@dataclass(frozen=True)
class PatternReport:
    id: int
    trained_at: str
    data_revision: int
    tree_text: str
    model_digest: str
    report: Optional[EvaluationReport]
    forest_accuracy: Optional[float]
    changed_from_previous: bool
    delta: PatternDelta
    trainable: bool = True

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def should_retrain(new_rows_since_last_train: int, threshold: int = DEFAULT_RETRAIN_THRESHOLD, has_model: bool = False) -> bool:
    """True when enough rows accumulated, or whenever no model exists yet."""
    if threshold < 1:
        raise ValueError("threshold must be positive")
    if not has_model:
        return True
    return new_rows_since_last_train >= threshold


def diff_patterns(prev: Optional[PatternReport], new: PatternReport) -> PatternDelta:
    """Accuracy shift and structure change between two trained reports.

    An absent previous report counts as everything changed.
    """
    if new.report is None:
        raise ValueError("diff_patterns needs a trained new report")
    if prev is None:
        return PatternDelta(accuracy_change=new.report.accuracy, structure_changed=True)
    if prev.report is None:
        raise ValueError("diff_patterns needs a trained previous report")
    return PatternDelta(
        accuracy_change=new.report.accuracy - prev.report.accuracy,
        structure_changed=new.model_digest != prev.model_digest,
    )


def _report_from_dict(raw: dict) -> PatternReport:
    rep = None
    if raw.get("report") is not None:
        r = raw["report"]
        rep = EvaluationReport(
            matrix=ConfusionMatrix(cells=tuple(tuple(int(c) for c in row) for row in r["matrix"]["cells"])),
            per_class=tuple(ClassMetrics(**m) for m in r["per_class"]),
            accuracy=r["accuracy"],
            macro_avg=AverageMetrics(**r["macro_avg"]),
            weighted_avg=AverageMetrics(**r["weighted_avg"]),
            mae=r["mae"],
            mse=r["mse"],
            rmse=r["rmse"],
            zero_division_flags=tuple(r.get("zero_division_flags", ())),
        )
    return PatternReport(
        id=raw["id"],
        trained_at=raw["trained_at"],
        data_revision=raw["data_revision"],
        tree_text=raw["tree_text"],
        model_digest=raw["model_digest"],
        report=rep,
        forest_accuracy=raw["forest_accuracy"],
        changed_from_previous=raw["changed_from_previous"],
        delta=PatternDelta(**raw["delta"]),
        trainable=raw.get("trainable", True),
    )


class PatternWatcher:
    """Owns the retrain lifecycle and the report history.

    With a data_dir, each report persists under ``reports/<id>/`` and the
    history is recovered on construction; without one, everything stays
    in memory.
    """

    def __init__(
        self,
        sink: DatasetSink,
        data_dir: str | Path | None = None,
        retrain_threshold: int = DEFAULT_RETRAIN_THRESHOLD,
        epsilon: float = DEFAULT_EPSILON,
        split: SplitSpec = SplitSpec(),
        forest_params: ForestParams = ForestParams(),
        grid: Iterable[TreeParams] | None = None,
        folds: int = 5,
    ):
        if retrain_threshold < 1:
            raise ValueError("retrain_threshold must be positive")
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        self._sink = sink
        self._reports_dir = Path(data_dir) / "reports" if data_dir is not None else None
        self._threshold = retrain_threshold
        self._epsilon = epsilon
        self._split = split
        self._forest_params = forest_params
        self._grid = list(grid) if grid is not None else None
        self._folds = folds
        self._state_lock = threading.Lock()
        self._train_lock = threading.Lock()
        self._pending = 0
        self._reports: list[PatternReport] = []
        self._wake = threading.Event()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        if self._reports_dir is not None:
            self._recover_reports()

    # -- report access ---------------------------------------------------

    @property
    def reports(self) -> tuple[PatternReport, ...]:
        with self._state_lock:
            return tuple(self._reports)

    def latest_trained(self) -> Optional[PatternReport]:
        with self._state_lock:
            return self._latest_trained_locked()

    def _latest_trained_locked(self) -> Optional[PatternReport]:
        for rep in reversed(self._reports):
            if rep.trainable:
                return rep
        return None

    def get_report(self, report_id: int) -> Optional[PatternReport]:
        with self._state_lock:
            for rep in self._reports:
                if rep.id == report_id:
                    return rep
        return None

    @property
    def model_version(self) -> int:
        """Id of the latest trained report, 0 before any successful training."""
        latest = self.latest_trained()
        return latest.id if latest is not None else 0

    @property
    def pending_rows(self) -> int:
        with self._state_lock:
            return self._pending

    # -- change signals and the background loop ---------------------------

    def notify_rows_applied(self, count_or_result) -> None:
        """Accumulate applied-row count; wakes the background loop."""
        count = getattr(count_or_result, "applied", count_or_result)
        if count <= 0:
            return
        with self._state_lock:
            self._pending += count
        self._wake.set()

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="pattern-watcher", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._wake.set()
        self._thread.join(timeout=30)
        self._thread = None

    def _run(self) -> None:
        while not self._stop.is_set():
            self._wake.wait(timeout=0.2)
            self._wake.clear()
            if self._stop.is_set():
                return
            while not self._stop.is_set():
                with self._state_lock:
                    pending = self._pending
                    has_model = self._latest_trained_locked() is not None
                if pending <= 0 or not should_retrain(pending, self._threshold, has_model):
                    break
                try:
                    self.train_now(wait=True)
                except Exception:
                    logger.exception("watcher: retrain failed")
                    break

    # -- retraining --------------------------------------------------------

    def train_now(self, wait: bool = False) -> PatternReport:
        """Run one retrain and publish its report.

        ``wait=False`` (the API path) raises RetrainInProgress instead of
        queueing behind a running retrain.
        """
        if wait:
            self._train_lock.acquire()
        elif not self._train_lock.acquire(blocking=False):
            raise RetrainInProgress("a retrain is already in progress")
        try:
            snapshot = self._sink.snapshot()
            with self._state_lock:
                pending_before = self._pending
                previous = self._latest_trained_locked()
                next_id = (self._reports[-1].id + 1) if self._reports else 1
            report, artifacts = self._build_report(next_id, snapshot, previous)
            self._persist(report, artifacts)
            with self._state_lock:
                self._reports.append(report)
                self._pending -= min(pending_before, self._pending)
            return report
        finally:
            self._train_lock.release()

    def _build_report(
        self, report_id: int, snapshot: DatasetSnapshot, previous: Optional[PatternReport]
    ) -> tuple[PatternReport, dict[str, bytes]]:
        trained_at = datetime.now(timezone.utc).isoformat()

        def untrainable(reason: str) -> tuple[PatternReport, dict[str, bytes]]:
            logger.warning("watcher: %s; keeping previous model", reason)
            report = PatternReport(
                id=report_id,
                trained_at=trained_at,
                data_revision=snapshot.revision,
                tree_text=previous.tree_text if previous else "",
                model_digest=previous.model_digest if previous else "",
                report=None,
                forest_accuracy=None,
                changed_from_previous=False,
                delta=PatternDelta(accuracy_change=0.0, structure_changed=False),
                trainable=False,
            )
            return report, {}

        kept, dropped = drop_incomplete(snapshot.rows)
        if dropped:
            logger.info("watcher: dropped %d incomplete rows", dropped)
        class_counts = [0, 0]
        for rec in kept:
            class_counts[rec.purchased] += 1
        if min(class_counts) < 2:
            return untrainable(f"snapshot untrainable (class counts {class_counts})")

        ds = select_features(kept)
        try:
            train, test = train_test_split(ds, self._split)
        except DegenerateSplitError:
            return untrainable("snapshot too small to split")
        standardizer = fit_standardizer(train)
        train_s = transform(train, standardizer)
        test_s = transform(test, standardizer)

        params, tree = tune_tree(train_s, grid=self._grid, folds=self._folds, seed=self._split.seed)
        evaluation = evaluate_predictions(test_s.labels, predict_tree_batch(tree, test_s.features))
        forest = build_forest(train_s, self._forest_params)
        forest_accuracy = float(
            (predict_forest_batch(forest, test_s.features) == test_s.labels).mean()
        )

        digest = model_digest(tree)
        tree_text = render_tree_text(tree)
        if previous is None:
            delta = PatternDelta(accuracy_change=evaluation.accuracy, structure_changed=True)
        else:
            delta = PatternDelta(
                accuracy_change=evaluation.accuracy - previous.report.accuracy,
                structure_changed=digest != previous.model_digest,
            )
        changed = delta.structure_changed or abs(delta.accuracy_change) > self._epsilon
        report = PatternReport(
            id=report_id,
            trained_at=trained_at,
            data_revision=snapshot.revision,
            tree_text=tree_text,
            model_digest=digest,
            report=evaluation,
            forest_accuracy=forest_accuracy,
            changed_from_previous=changed,
            delta=delta,
        )
        svg = render_decision_regions(
            lambda grid_points: predict_tree_batch(tree, grid_points),
            test_s.features,
            test_s.labels,
            test_s.feature_names,
        )
        artifacts = {
            "report.txt": render_report_text(evaluation).encode("utf-8"),
            "tree.txt": tree_text.encode("utf-8"),
            "model.json": (
                json.dumps(serialize_tree(tree), indent=2, sort_keys=True) + "\n"
            ).encode("utf-8"),
            "decision_regions.svg": svg.encode("utf-8"),
        }
        return report, artifacts

    # -- persistence -------------------------------------------------------

    def _persist(self, report: PatternReport, artifacts: dict[str, bytes]) -> None:
        if self._reports_dir is None:
            return
        final_dir = self._reports_dir / str(report.id)
        tmp_dir = self._reports_dir / f".tmp-{report.id}"
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)
        tmp_dir.mkdir(parents=True)
        try:
            for name, data in artifacts.items():
                (tmp_dir / name).write_bytes(data)
            meta = json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
            (tmp_dir / "meta.json").write_text(meta, encoding="utf-8")
            if final_dir.exists():
                shutil.rmtree(final_dir)
            os.replace(tmp_dir, final_dir)
        except Exception:
            shutil.rmtree(tmp_dir, ignore_errors=True)
            raise

    def _recover_reports(self) -> None:
        if not self._reports_dir.is_dir():
            return
        found = []
        for entry in self._reports_dir.iterdir():
            if not entry.is_dir() or not entry.name.isdigit():
                continue
            meta_path = entry / "meta.json"
            if not meta_path.is_file():
                continue
            try:
                found.append(_report_from_dict(json.loads(meta_path.read_text(encoding="utf-8"))))
            except (ValueError, KeyError, TypeError) as exc:
                logger.warning("watcher: skipping unreadable report %s: %s", entry.name, exc)
        found.sort(key=lambda r: r.id)
        self._reports = found
