"""Composition root: builds every component from a config and runs the
HTTP server plus background threads as one stoppable unit.
"""

from __future__ import annotations

import logging
import threading
import time
from pathlib import Path
from typing import Optional

import uvicorn

from .config import WardenConfig
from .gateway import SchedulerLoop, WorkerLoop, create_app
from .preprocess import SplitSpec
from .sink import DatasetSink
from .sync import CursorStore, SyncPipeline
from .warehouse import Warehouse
from .watcher import PatternWatcher

logger = logging.getLogger(__name__)

WAREHOUSE_FILENAME = "warehouse.log"
CURSOR_FILENAME = "cursor.json"


def build_components(config: WardenConfig) -> tuple[Warehouse, DatasetSink, SyncPipeline, PatternWatcher]:
    """Construct the persistent component stack rooted at config.data_dir."""
    data_dir = Path(config.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    warehouse = Warehouse(data_dir / WAREHOUSE_FILENAME)
    sink = DatasetSink(data_dir)
    watcher = PatternWatcher(
        sink,
        data_dir,
        retrain_threshold=config.retrain_threshold,
        epsilon=config.epsilon,
        split=SplitSpec(test_fraction=config.test_fraction, seed=config.split_seed),
    )
    pipeline = SyncPipeline(
        warehouse,
        sink,
        CursorStore(data_dir / CURSOR_FILENAME),
        batch_limit=config.batch_limit,
        on_applied=watcher.notify_rows_applied,
    )
    return warehouse, sink, pipeline, watcher


class Runtime:
    """The deployable unit: gateway + scheduler + worker + watcher."""

    def __init__(self, config: WardenConfig):
        config.require_api_keys()
        self.config = config
        self.warehouse, self.sink, self.pipeline, self.watcher = build_components(config)
        self.app = create_app(self.sink, self.pipeline, self.watcher, config.api_keys)
        self._server: Optional[uvicorn.Server] = None
        self._server_thread: Optional[threading.Thread] = None
        self._scheduler: Optional[SchedulerLoop] = None
        self._worker: Optional[WorkerLoop] = None
        self._port: Optional[int] = None

    @property
    def port(self) -> int:
        """The actually bound port; resolves port 0 after start()."""
        if self._port is None:
            raise RuntimeError("runtime is not started")
        return self._port

    @property
    def base_url(self) -> str:
        host = self.config.bind_host
        loopback = "127.0.0.1" if host in ("0.0.0.0", "::") else host
        return f"http://{loopback}:{self.port}"

    def start(self, wait_timeout: float = 15.0) -> None:
        uv_config = uvicorn.Config(
            self.app,
            host=self.config.bind_host,
            port=self.config.bind_port,
            log_level="warning",
            access_log=False,
        )
        self._server = uvicorn.Server(uv_config)
        self._server_thread = threading.Thread(target=self._server.run, name="gateway-http", daemon=True)
        self._server_thread.start()
        deadline = time.monotonic() + wait_timeout
        while not self._server.started:
            if time.monotonic() > deadline:
                self.stop()
                raise RuntimeError("HTTP server failed to start (port in use?)")
            if not self._server_thread.is_alive():
                raise RuntimeError("HTTP server exited during startup (port in use?)")
            time.sleep(0.01)
        self._port = self._server.servers[0].sockets[0].getsockname()[1]

        self.watcher.start()
        self._worker = WorkerLoop(self.pipeline, self.config.worker_interval)
        self._worker.start()
        self._scheduler = SchedulerLoop(self.base_url, self.config.api_keys[0], self.config.scheduler_interval)
        self._scheduler.start()
        logger.info("serving on %s (data_dir=%s)", self.base_url, self.config.data_dir)

    def stop(self) -> None:
        if self._scheduler is not None:
            self._scheduler.stop()
            self._scheduler = None
        if self._worker is not None:
            self._worker.stop()
            self._worker = None
        self.watcher.stop()
        if self._server is not None:
            self._server.should_exit = True
            if self._server_thread is not None:
                self._server_thread.join(timeout=10)
            self._server = None
            self._server_thread = None
        self._port = None
