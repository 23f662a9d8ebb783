"""Dataset sink: the keyed, persistent stand-in for the cloud-hosted CSV.

The sink is the only data source the gateway and the mining engine ever
read. ``dataset.csv`` is primary, ``dataset.json`` a mirror; both are
deterministic byte-for-byte for equal snapshots (canonical row order is
ascending user_id) and are replaced atomically via write-temp-then-rename
so readers never observe torn files.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .records import CSV_HEADER, CustomerRecord, ValidationError, record_from_fields, record_from_mapping

CSV_FILENAME = "dataset.csv"
JSON_FILENAME = "dataset.json"
META_FILENAME = "sink.meta.json"


@dataclass(frozen=True)
class DatasetSnapshot:
    """Rows in canonical order (ascending user_id) plus the applied-batch revision."""

    rows: tuple[CustomerRecord, ...] = ()
    revision: int = 0

    def __post_init__(self) -> None:
        ids = [r.user_id for r in self.rows]
        if sorted(ids) != ids:
            raise ValidationError("snapshot rows must be sorted ascending by user_id")
        if len(set(ids)) != len(ids):
            raise ValidationError("snapshot rows must not repeat user_id")


def encode_csv(snapshot: DatasetSnapshot) -> bytes:
    lines = [CSV_HEADER]
    lines.extend(r.csv_line() for r in snapshot.rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def decode_csv(data: bytes) -> DatasetSnapshot:
    """Parse and validate CSV bytes; rows come back in canonical order."""
    text = data.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != CSV_HEADER:
        got = lines[0] if lines else "<empty>"
        raise ValidationError(f"header mismatch: expected {CSV_HEADER!r}, got {got!r}")
    records: dict[int, CustomerRecord] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            record = record_from_fields(line.split(","))
        except ValidationError as exc:
            raise ValidationError(f"row at line {lineno}: {exc}") from None
        if record.user_id in records:
            raise ValidationError(f"duplicate user_id {record.user_id} at line {lineno}")
        records[record.user_id] = record
    rows = tuple(records[k] for k in sorted(records))
    return DatasetSnapshot(rows=rows)


def encode_json(snapshot: DatasetSnapshot) -> bytes:
    docs = [r.as_dict() for r in snapshot.rows]
    return json.dumps(docs, separators=(",", ":")).encode("utf-8")


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


@dataclass
class _SinkState:
    records: dict[int, CustomerRecord] = field(default_factory=dict)
    revision: int = 0
    materialized: bool = False


class DatasetSink:
    """Keyed dataset files under ``data_dir``; ``data_dir=None`` keeps state in memory.

    Single-writer (the sync pipeline's serialized apply step); readers get
    complete files because every write is an atomic replace.
    """

    def __init__(self, data_dir: str | Path | None = None):
        self._dir = Path(data_dir) if data_dir is not None else None
        self._lock = threading.RLock()
        self._state = _SinkState()
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._load()

    def _load(self) -> None:
        csv_path = self._dir / CSV_FILENAME
        if not csv_path.exists():
            return
        snapshot = decode_csv(csv_path.read_bytes())
        self._state.records = {r.user_id: r for r in snapshot.rows}
        self._state.materialized = True
        meta_path = self._dir / META_FILENAME
        if meta_path.exists():
            self._state.revision = int(json.loads(meta_path.read_text())["revision"])

    # -- queries ----------------------------------------------------------

    def snapshot(self) -> DatasetSnapshot:
        with self._lock:
            rows = tuple(self._state.records[k] for k in sorted(self._state.records))
            return DatasetSnapshot(rows=rows, revision=self._state.revision)

    @property
    def revision(self) -> int:
        with self._lock:
            return self._state.revision

    def row_count(self) -> int:
        with self._lock:
            return len(self._state.records)

    def initialized(self) -> bool:
        """True once the sink has been materialized (even empty); gates the data endpoint."""
        with self._lock:
            if self._dir is None:
                return self._state.materialized
            return (self._dir / CSV_FILENAME).exists()

    def csv_bytes(self) -> bytes:
        return encode_csv(self.snapshot())

    def json_bytes(self) -> bytes:
        return encode_json(self.snapshot())

    # -- writes -----------------------------------------------------------

    def materialize(self) -> None:
        """Write the current (possibly empty) dataset files if absent."""
        with self._lock:
            if not self.initialized():
                self._write_files()
            self._state.materialized = True

    def upsert_rows(self, records: Iterable[CustomerRecord | Mapping]) -> int:
        """Insert-or-replace the batch keyed by user_id; returns the revision.

        The batch is validated in full before any state change (atomic
        reject). A user_id repeated within one batch keeps the later
        record, matching version-ordered application. The revision bumps
        if and only if the encoded content changed.
        """
        batch = [r if isinstance(r, CustomerRecord) else record_from_mapping(r) for r in records]
        with self._lock:
            before = encode_csv(self.snapshot())
            merged = dict(self._state.records)
            for record in batch:
                merged[record.user_id] = record
            after_rows = tuple(merged[k] for k in sorted(merged))
            after = encode_csv(DatasetSnapshot(rows=after_rows))
            if after != before or not self._state.materialized:
                self._state.records = merged
                if after != before:
                    self._state.revision += 1
                self._write_files()
                self._state.materialized = True
            return self._state.revision

    def _write_files(self) -> None:
        if self._dir is None:
            return
        snapshot = self.snapshot()
        _atomic_write(self._dir / CSV_FILENAME, encode_csv(snapshot))
        _atomic_write(self._dir / JSON_FILENAME, encode_json(snapshot))
        _atomic_write(
            self._dir / META_FILENAME,
            json.dumps({"revision": snapshot.revision}, separators=(",", ":")).encode("utf-8"),
        )
