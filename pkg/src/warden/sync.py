"""Change-capture pipeline between the warehouse and the dataset sink.

Delivery is at-least-once fetch plus idempotent keyed upsert, which adds
up to an exactly-once effect: the cursor only advances after a successful
sink write, so a crash or write failure just replays the same entries and
the keyed upsert absorbs the redelivery. Both trigger paths (the gateway's
on-demand sync and the background reconciliation sweep) share one cursor
and one serialized apply step.
"""

from __future__ import annotations

import enum
import json
import logging
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from .sink import DatasetSink
from .warehouse import Warehouse

logger = logging.getLogger(__name__)

CURSOR_FILENAME = "cursor.json"
DEFAULT_BATCH_LIMIT = 500


class SyncSource(enum.Enum):
    API_TRIGGERED = "api-triggered"
    BACKGROUND_WORKER = "background-worker"


@dataclass(frozen=True)
class SyncCursor:
    """High-water mark of applied changes; monotonically non-decreasing."""

    last_applied_version: int = 0
    last_run_at: str = ""
    runs_completed: int = 0


@dataclass(frozen=True)
class SyncResult:
    applied: int
    new_cursor: SyncCursor
    source: SyncSource
    error: Optional[str] = None


class CursorStore:
    """Cursor persisted as a small JSON file alongside the sink."""

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None

    def load(self) -> SyncCursor:
        if self._path is None or not self._path.exists():
            return SyncCursor()
        doc = json.loads(self._path.read_text(encoding="utf-8"))
        return SyncCursor(
            last_applied_version=int(doc["last_applied_version"]),
            last_run_at=str(doc.get("last_run_at", "")),
            runs_completed=int(doc.get("runs_completed", 0)),
        )

    def save(self, cursor: SyncCursor) -> None:
        if self._path is None:
            return
        doc = {
            "last_applied_version": cursor.last_applied_version,
            "last_run_at": cursor.last_run_at,
            "runs_completed": cursor.runs_completed,
        }
        tmp = self._path.with_name(self._path.name + ".tmp")
        tmp.write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")
        tmp.replace(self._path)


class SyncPipeline:
    """Funnels warehouse changes into the sink idempotently.

    ``on_applied`` is the watcher's data-changed signal; it fires outside
    the critical section whenever a run applied at least one entry.
    """

    def __init__(
        self,
        warehouse: Warehouse,
        sink: DatasetSink,
        cursor_store: CursorStore | None = None,
        batch_limit: int = DEFAULT_BATCH_LIMIT,
        on_applied: Callable[[SyncResult], None] | None = None,
    ):
        self._warehouse = warehouse
        self._sink = sink
        self._store = cursor_store or CursorStore()
        self._batch_limit = batch_limit
        self._on_applied = on_applied
        self._lock = threading.Lock()
        self._cursor = self._store.load()

    @property
    def cursor(self) -> SyncCursor:
        return self._cursor

    def run_sync(self, batch_limit: int | None = None, source: SyncSource = SyncSource.API_TRIGGERED) -> SyncResult:
        """One sync pass: fetch changes past the cursor, apply to the sink, advance.

        The sink write and the cursor advance happen inside one serialized
        critical section; a failed sink write leaves the cursor untouched
        so the next run redelivers the same batch.
        """
        if batch_limit is None:
            batch_limit = self._batch_limit
        if batch_limit <= 0:
            raise ValueError("batch_limit must be positive")
        with self._lock:
            cursor = self._cursor
            try:
                entries = self._warehouse.get_changes_since(cursor.last_applied_version, batch_limit)
            except Exception as exc:  # warehouse unavailable: report, do not advance
                logger.warning("sync: warehouse unavailable: %s", exc)
                return SyncResult(applied=0, new_cursor=cursor, source=source, error=f"warehouse unavailable: {exc}")
            try:
                if entries:
                    self._sink.upsert_rows([e.record for e in entries])
                else:
                    self._sink.materialize()
            except Exception as exc:  # sink write failed: cursor NOT advanced
                logger.warning("sync: sink write failed: %s", exc)
                return SyncResult(applied=0, new_cursor=cursor, source=source, error=f"sink write failed: {exc}")
            new_version = entries[-1].version if entries else cursor.last_applied_version
            new_cursor = SyncCursor(
                last_applied_version=new_version,
                last_run_at=datetime.now(timezone.utc).isoformat(),
                runs_completed=cursor.runs_completed + 1,
            )
            self._store.save(new_cursor)
            self._cursor = new_cursor
            result = SyncResult(applied=len(entries), new_cursor=new_cursor, source=source)
        self.notify_applied(result)
        return result

    def reconcile_sweep(self, batch_limit: int | None = None) -> SyncResult:
        """The background worker's pass: same contract as run_sync, worker-sourced.

        Picks up any backlog the API-triggered path missed, for whatever
        reason, simply by consuming everything above the shared cursor.
        """
        return self.run_sync(batch_limit=batch_limit, source=SyncSource.BACKGROUND_WORKER)

    def notify_applied(self, result: SyncResult) -> None:
        """Deliver the data-changed signal when a run applied entries."""
        if result.applied > 0 and self._on_applied is not None:
            try:
                self._on_applied(result)
            except Exception:
                logger.exception("sync: on_applied listener failed")
