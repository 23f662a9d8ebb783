"""Simulated integrated data warehouse with a monotonic change log.

The store is authoritative for records and is never read by mining code;
consumers reach the data only through the sync pipeline and the sink.
Persistence is one newline-delimited JSON change entry per line in a single
append-only log file. Readers re-ingest any bytes appended past their last
offset before answering, so a second process appending to the same log
(e.g. the ``seed`` / ``simulate`` CLI commands against a running service)
is observed without restarts. Appends take an exclusive ``flock`` on the
log so version assignment stays strictly monotonic across processes.
"""

from __future__ import annotations

import enum
import fcntl
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .records import CSV_HEADER, CustomerRecord, ValidationError, record_from_fields, record_from_mapping


class ChangeKind(enum.Enum):
    INSERT = "insert"
    UPDATE = "update"


@dataclass(frozen=True)
class ChangeEntry:
    """One versioned change: strictly monotonic version, the record, insert/update kind."""

    version: int
    record: CustomerRecord
    kind: ChangeKind

    def to_json_line(self) -> str:
        doc = {"version": self.version, "kind": self.kind.value, "record": self.record.as_dict()}
        return json.dumps(doc, separators=(",", ":")) + "\n"


def _entry_from_line(line: str) -> ChangeEntry:
    doc = json.loads(line)
    return ChangeEntry(
        version=int(doc["version"]),
        record=record_from_mapping(doc["record"]),
        kind=ChangeKind(doc["kind"]),
    )


class Warehouse:
    """Record store keyed by ``user_id`` with an append-only change log.

    ``path=None`` keeps everything in memory (tests); otherwise state is
    rebuilt from the log on startup and every reader refreshes from disk
    first, making the log a live change feed across processes.
    """

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._records: dict[int, CustomerRecord] = {}
        self._log: list[ChangeEntry] = []
        self._offset = 0  # bytes of the log file already ingested
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.touch(exist_ok=True)
            with self._lock:
                self._refresh_locked()

    # -- persistence ----------------------------------------------------

    def _ingest(self, data: bytes) -> int:
        """Parse complete log lines; returns the byte count consumed."""
        end = data.rfind(b"\n")
        if end < 0:
            return 0  # torn tail without newline: not yet visible
        for raw in data[: end + 1].splitlines():
            entry = _entry_from_line(raw.decode("utf-8"))
            self._log.append(entry)
            self._records[entry.record.user_id] = entry.record
        return end + 1

    def _refresh_locked(self) -> None:
        if self._path is None:
            return
        with open(self._path, "rb") as fh:
            fcntl.flock(fh, fcntl.LOCK_SH)
            try:
                fh.seek(self._offset)
                data = fh.read()
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)
        self._offset += self._ingest(data)

    def _refresh_from_handle(self, fh: IO[bytes]) -> None:
        fh.seek(self._offset)
        self._offset += self._ingest(fh.read())

    # -- operations -----------------------------------------------------

    def upsert_record(self, record: CustomerRecord) -> ChangeEntry:
        """Store the record; returns the ChangeEntry with the next version.

        Kind is INSERT when the user_id was absent, UPDATE otherwise. A
        rejected (invalid) record consumes no version.
        """
        if not isinstance(record, CustomerRecord):
            record = record_from_mapping(record)
        with self._lock:
            if self._path is None:
                return self._append_locked(record)
            with open(self._path, "a+b") as fh:
                fcntl.flock(fh, fcntl.LOCK_EX)
                try:
                    self._refresh_from_handle(fh)
                    entry = self._make_entry(record)
                    line = entry.to_json_line().encode("utf-8")
                    fh.seek(0, 2)
                    fh.write(line)
                    fh.flush()
                finally:
                    fcntl.flock(fh, fcntl.LOCK_UN)
            self._offset += len(line)
            self._log.append(entry)
            self._records[record.user_id] = record
            return entry

    def _make_entry(self, record: CustomerRecord) -> ChangeEntry:
        kind = ChangeKind.UPDATE if record.user_id in self._records else ChangeKind.INSERT
        version = (self._log[-1].version if self._log else 0) + 1
        return ChangeEntry(version=version, record=record, kind=kind)

    def _append_locked(self, record: CustomerRecord) -> ChangeEntry:
        entry = self._make_entry(record)
        self._log.append(entry)
        self._records[record.user_id] = record
        return entry

    def get_changes_since(self, cursor_version: int, limit: int = 500) -> list[ChangeEntry]:
        """Up to ``limit`` entries with version > cursor_version, ascending."""
        if limit <= 0:
            raise ValueError("limit must be positive")
        with self._lock:
            self._refresh_locked()
            # versions are 1..latest with no gaps, so the slice start is direct
            start = max(cursor_version, 0)
            return self._log[start : start + limit]

    def latest_version(self) -> int:
        with self._lock:
            self._refresh_locked()
            return self._log[-1].version if self._log else 0

    def record_count(self) -> int:
        with self._lock:
            self._refresh_locked()
            return len(self._records)

    def records(self) -> dict[int, CustomerRecord]:
        """Snapshot of the current record set (copies; for tests and seeding checks)."""
        with self._lock:
            self._refresh_locked()
            return dict(self._records)

    def seed_from_fixture(self, path: str | Path) -> int:
        """Upsert every row of a fixture CSV; returns the row count.

        The whole file is validated before any write so a malformed row
        (reported with its line number) aborts the seed cleanly.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"fixture not found: {path}")
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines or lines[0] != CSV_HEADER:
            got = lines[0] if lines else "<empty file>"
            raise ValidationError(f"fixture header mismatch: expected {CSV_HEADER!r}, got {got!r}")
        parsed: list[CustomerRecord] = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                parsed.append(record_from_fields(line.split(",")))
            except ValidationError as exc:
                raise ValidationError(f"fixture row at line {lineno}: {exc}") from None
        current = self.records()
        for record in parsed:
            # skip no-op upserts so re-seeding leaves the log untouched
            if current.get(record.user_id) != record:
                self.upsert_record(record)
        return len(parsed)
