"""The authenticated REST surface plus the two background drivers.

Consumers get data exclusively through these routes; nothing here reads
the warehouse directly. The sync pipeline is the single component that
touches it, and only the /sync handler (or a background driver) invokes
the pipeline. The scheduler deliberately goes through its own HTTP
endpoint instead of calling run_sync in-process, so the wire path is
exercised on every tick.
"""

from __future__ import annotations

import hmac
import logging
import threading
import time
from typing import Optional

import httpx
from fastapi import APIRouter, Depends, FastAPI, HTTPException, Query, Request, Response

from .sink import DatasetSink
from .sync import SyncPipeline, SyncSource
from .watcher import PatternWatcher, RetrainInProgress

logger = logging.getLogger(__name__)


def _key_checker(api_keys: tuple[str, ...]):
    def check(request: Request) -> None:
        supplied = (request.headers.get("X-API-Key") or "").encode("utf-8")
        # scan every key so timing does not leak which one matched
        allowed = False
        for key in api_keys:
            if hmac.compare_digest(supplied, key.encode("utf-8")):
                allowed = True
        if not allowed:
            raise HTTPException(status_code=401)

    return check


def create_app(
    sink: DatasetSink,
    pipeline: SyncPipeline,
    watcher: PatternWatcher,
    api_keys: tuple[str, ...],
) -> FastAPI:
    app = FastAPI(title="warden", docs_url=None, redoc_url=None, openapi_url=None)
    started = time.monotonic()

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "sink_revision": sink.revision,
            "cursor_version": pipeline.cursor.last_applied_version,
            "model_version": watcher.model_version,
            "uptime": round(time.monotonic() - started, 3),
        }

    authed = APIRouter(dependencies=[Depends(_key_checker(api_keys))])

    @authed.get("/customers/social")
    def customers(request: Request, fmt: Optional[str] = Query(default=None, alias="format")) -> Response:
        if not sink.initialized():
            raise HTTPException(status_code=503, detail="dataset not yet synced")
        if fmt == "csv" or "text/csv" in request.headers.get("accept", ""):
            return Response(content=sink.csv_bytes(), media_type="text/csv")
        return Response(content=sink.json_bytes(), media_type="application/json")

    @authed.post("/sync")
    def sync() -> dict:
        result = pipeline.run_sync(source=SyncSource.API_TRIGGERED)
        if result.error is not None:
            raise HTTPException(status_code=502, detail=result.error)
        return {
            "applied": result.applied,
            "last_applied_version": result.new_cursor.last_applied_version,
            "source": result.source.value,
        }

    @authed.post("/model/train")
    def train() -> dict:
        try:
            report = watcher.train_now()
        except RetrainInProgress:
            raise HTTPException(status_code=409, detail="retrain already in progress") from None
        return {"report_id": report.id, "trainable": report.trainable, "model_digest": report.model_digest}

    @authed.get("/model/report")
    def model_report() -> dict:
        report = watcher.latest_trained()
        if report is None:
            raise HTTPException(status_code=404, detail="no trained model yet")
        return report.as_dict()

    app.include_router(authed)
    return app


class _IntervalLoop:
    """Fixed-interval daemon thread; a slow tick delays the next, never stacks."""

    def __init__(self, interval: float, name: str):
        if interval <= 0:
            raise ValueError("interval must be positive")
        self._interval = interval
        self._name = name
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name=self._name, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._thread.join(timeout=10)
        self._thread = None

    def _run(self) -> None:
        while not self._stop.is_set():
            begin = time.monotonic()
            try:
                self._tick()
            except Exception:
                logger.warning("%s: tick failed", self._name, exc_info=True)
            elapsed = time.monotonic() - begin
            if self._stop.wait(max(0.0, self._interval - elapsed)):
                return

    def _tick(self) -> None:
        raise NotImplementedError


class SchedulerLoop(_IntervalLoop):
    """Triggers sync over the service's own HTTP endpoint at each interval."""

    def __init__(self, base_url: str, api_key: str, interval: float):
        super().__init__(interval, "sync-scheduler")
        self._base_url = base_url
        self._api_key = api_key

    def _tick(self) -> None:
        response = httpx.post(
            f"{self._base_url}/sync",
            headers={"X-API-Key": self._api_key},
            timeout=10.0,
        )
        if response.status_code != 200:
            logger.warning("scheduler: POST /sync returned %d", response.status_code)


class WorkerLoop(_IntervalLoop):
    """In-process reconcile sweep; the safety net when nothing else syncs."""

    def __init__(self, pipeline: SyncPipeline, interval: float):
        super().__init__(interval, "sync-worker")
        self._pipeline = pipeline

    def _tick(self) -> None:
        result = self._pipeline.reconcile_sweep()
        if result.error is not None:
            logger.warning("worker: sweep failed: %s", result.error)
