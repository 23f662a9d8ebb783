"""Sync pipeline: cursor advancement, batching, failure handling, listener
delivery, and cursor persistence."""

import pytest

from warden.sink import DatasetSink
from warden.sync import CursorStore, SyncCursor, SyncPipeline, SyncResult, SyncSource
from warden.warehouse import Warehouse

from conftest import rec


class FailingSink(DatasetSink):
    """Sink whose writes can be switched to fail before any state change."""

    def __init__(self):
        super().__init__()
        self.fail = False

    def upsert_rows(self, records):
        if self.fail:
            raise OSError("disk full")
        return super().upsert_rows(records)

    def materialize(self):
        if self.fail:
            raise OSError("disk full")
        super().materialize()


class BrokenWarehouse(Warehouse):
    def get_changes_since(self, cursor_version, limit=500):
        raise ConnectionError("warehouse offline")


def fresh(n_pending=0, **kwargs):
    wh = Warehouse()
    for i in range(n_pending):
        wh.upsert_record(rec(500 + i))
    sink = DatasetSink()
    return wh, sink, SyncPipeline(wh, sink, **kwargs)


def test_sync_applies_pending_changes():
    wh, sink, pipeline = fresh(3)
    result = pipeline.run_sync()
    assert result.applied == 3
    assert result.error is None
    assert result.source is SyncSource.API_TRIGGERED
    assert result.new_cursor.last_applied_version == 3
    assert result.new_cursor.runs_completed == 1
    assert sink.row_count() == 3
    assert pipeline.cursor == result.new_cursor


def test_repeat_sync_is_idempotent():
    wh, sink, pipeline = fresh(3)
    pipeline.run_sync()
    before = sink.csv_bytes()
    again = pipeline.run_sync()
    assert again.applied == 0
    assert sink.csv_bytes() == before
    assert sink.revision == 1
    assert pipeline.cursor.last_applied_version == 3
    assert pipeline.cursor.runs_completed == 2


def test_sync_pages_with_batch_limit():
    wh, sink, pipeline = fresh(10, batch_limit=4)
    counts = [pipeline.run_sync().applied for _ in range(4)]
    assert counts == [4, 4, 2, 0]
    assert sink.row_count() == 10
    assert pipeline.cursor.last_applied_version == 10


def test_per_call_batch_limit_overrides_default():
    wh, sink, pipeline = fresh(5, batch_limit=100)
    assert pipeline.run_sync(batch_limit=2).applied == 2
    with pytest.raises(ValueError):
        pipeline.run_sync(batch_limit=0)


def test_updates_flow_through():
    wh, sink, pipeline = fresh()
    wh.upsert_record(rec(9, age=20))
    pipeline.run_sync()
    wh.upsert_record(rec(9, age=55))
    result = pipeline.run_sync()
    assert result.applied == 1
    assert sink.row_count() == 1
    assert sink.snapshot().rows[0].age == 55


def test_warehouse_failure_reports_and_keeps_cursor():
    sink = DatasetSink()
    pipeline = SyncPipeline(BrokenWarehouse(), sink)
    result = pipeline.run_sync()
    assert result.applied == 0
    assert result.error == "warehouse unavailable: warehouse offline"
    assert result.new_cursor == SyncCursor()
    assert pipeline.cursor.runs_completed == 0
    assert not sink.initialized()


def test_sink_failure_keeps_cursor_then_retry_applies():
    wh = Warehouse()
    for i in range(4):
        wh.upsert_record(rec(600 + i))
    sink = FailingSink()
    pipeline = SyncPipeline(wh, sink)
    sink.fail = True
    result = pipeline.run_sync()
    assert result.applied == 0
    assert result.error == "sink write failed: disk full"
    assert pipeline.cursor.last_applied_version == 0
    assert sink.row_count() == 0
    sink.fail = False
    retry = pipeline.run_sync()
    assert retry.applied == 4
    assert retry.error is None
    assert sink.row_count() == 4


def test_empty_sync_materializes_sink():
    wh, sink, pipeline = fresh(0)
    assert not sink.initialized()
    result = pipeline.run_sync()
    assert result.applied == 0 and result.error is None
    assert sink.initialized()
    assert sink.row_count() == 0


def test_reconcile_sweep_uses_worker_source_and_shared_cursor():
    wh, sink, pipeline = fresh(2)
    first = pipeline.reconcile_sweep()
    assert first.source is SyncSource.BACKGROUND_WORKER
    assert first.applied == 2
    # the API path sees the same cursor: nothing left to apply
    assert pipeline.run_sync().applied == 0


def test_listener_fires_only_when_rows_applied():
    events = []
    wh = Warehouse()
    wh.upsert_record(rec(1))
    wh.upsert_record(rec(2))
    sink = DatasetSink()
    pipeline = SyncPipeline(wh, sink, on_applied=events.append)
    pipeline.run_sync()
    pipeline.run_sync()
    assert len(events) == 1
    assert isinstance(events[0], SyncResult)
    assert events[0].applied == 2
    wh.upsert_record(rec(3))
    wh.upsert_record(rec(4))
    wh.upsert_record(rec(2, age=40))
    pipeline.run_sync()
    assert [e.applied for e in events] == [2, 3]


def test_listener_exception_is_swallowed():
    def bad_listener(result):
        raise RuntimeError("listener blew up")

    wh, sink, pipeline = fresh(1, on_applied=bad_listener)
    result = pipeline.run_sync()
    assert result.applied == 1
    assert pipeline.cursor.last_applied_version == 1


def test_cursor_persistence_round_trip(tmp_path):
    cursor_path = tmp_path / "cursor.json"
    wh = Warehouse()
    for i in range(3):
        wh.upsert_record(rec(700 + i))
    sink = DatasetSink()
    pipeline = SyncPipeline(wh, sink, cursor_store=CursorStore(cursor_path))
    pipeline.run_sync()
    assert cursor_path.exists()
    loaded = CursorStore(cursor_path).load()
    assert loaded.last_applied_version == 3
    assert loaded.runs_completed == 1
    assert loaded.last_run_at != ""
    # a new pipeline over the same store resumes, not replays
    fresh_sink = DatasetSink()
    resumed = SyncPipeline(wh, fresh_sink, cursor_store=CursorStore(cursor_path))
    assert resumed.cursor == loaded
    assert resumed.run_sync().applied == 0


def test_default_cursor_store_is_memory_only():
    store = CursorStore()
    assert store.load() == SyncCursor()
    store.save(SyncCursor(last_applied_version=9))
    assert store.load() == SyncCursor()
