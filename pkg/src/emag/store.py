"""Embedded single-node store: a write-ahead log plus compacted snapshots.

All engine state (sources, contents, users, interests, the event log,
saved items, ratings, recommender blobs) lives in named namespaces of a
single process-local key-value store. Writes are serialized through one
lock and appended to `data/wal.log` as checksummed JSON lines before being
applied in memory, so a crash mid-batch leaves either all or none of the
batch visible after reopen. `compact()` folds the log into
`data/snapshots/NNNN.json`.

Readers that need a consistent view across namespaces take `snapshot()`,
which is an immutable deep copy; later writes never show through it.
"""

from __future__ import annotations

import copy
import json
import os
import re
import threading
import zlib
from pathlib import Path

NAMESPACES = (
    "sources",
    "contents",
    "contents_by_category",
    "users",
    "interests",
    "events",
    "event_ids",
    "saved",
    "ratings",
    "decomposition_blobs",
    "keyword_category_cache",
    "meta",
)

# composite keys use a separator that cannot appear in ids/keywords
SEP = "\x1f"

_SNAPSHOT_RE = re.compile(r"^(\d{4})\.json$")


class StoreError(Exception):
    pass


class StoreSnapshot:
    """Immutable point-in-time view of every namespace."""

    def __init__(self, data: dict[str, dict]):
        self._data = data

    def get(self, namespace: str, key: str, default=None):
        return self._data.get(namespace, {}).get(key, default)

    def items(self, namespace: str) -> list[tuple[str, object]]:
        return sorted(self._data.get(namespace, {}).items())

    def scan(self, namespace: str, prefix: str) -> list[tuple[str, object]]:
        return [(k, v) for k, v in self.items(namespace) if k.startswith(prefix)]


class Store:
    def __init__(self, data_dir: str | Path | None = None, sync: bool = True):
        self._lock = threading.RLock()
        self._data: dict[str, dict] = {ns: {} for ns in NAMESPACES}
        self._sync = sync
        self._wal_file = None
        self._dir = Path(data_dir) if data_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            (self._dir / "snapshots").mkdir(exist_ok=True)
            self._recover()
            self._wal_file = open(self._wal_path, "ab")

    # ------------------------------------------------------------------ wal

    @property
    def _wal_path(self) -> Path:
        return self._dir / "wal.log"

    def _recover(self) -> None:
        snap_dir = self._dir / "snapshots"
        numbered = sorted(
            (m.group(1), p)
            for p in snap_dir.iterdir()
            if (m := _SNAPSHOT_RE.match(p.name))
        )
        for _, path in reversed(numbered):
            try:
                loaded = json.loads(path.read_text())
                self._data = {ns: dict(loaded.get(ns, {})) for ns in NAMESPACES}
                break
            except (ValueError, OSError):
                continue  # half-written snapshot; fall back to the previous one
        if self._wal_path.exists():
            with open(self._wal_path, "rb") as fh:
                for line in fh:
                    record = self._decode_wal_line(line)
                    if record is None:
                        break  # torn tail: everything after it was never acked
                    self._apply(record)

    @staticmethod
    def _decode_wal_line(line: bytes) -> list | None:
        try:
            envelope = json.loads(line)
            payload = json.dumps(envelope["ops"], sort_keys=True)
            if zlib.crc32(payload.encode()) != envelope["crc"]:
                return None
            return envelope["ops"]
        except (ValueError, KeyError, TypeError):
            return None

    def _commit(self, ops: list) -> None:
        # ops: [namespace, key, value-or-None]; None means delete
        if self._wal_file is not None:
            payload = json.dumps(ops, sort_keys=True)
            envelope = json.dumps({"crc": zlib.crc32(payload.encode()), "ops": json.loads(payload)}, sort_keys=True)
            self._wal_file.write(envelope.encode() + b"\n")
            self._wal_file.flush()
            if self._sync:
                os.fsync(self._wal_file.fileno())
        self._apply(ops)

    def _apply(self, ops: list) -> None:
        for namespace, key, value in ops:
            if namespace not in self._data:
                raise StoreError(f"unknown namespace: {namespace}")
            if value is None:
                self._data[namespace].pop(key, None)
            else:
                self._data[namespace][key] = value

    # ----------------------------------------------------------- primitives

    def put(self, namespace: str, key: str, value) -> None:
        self.put_many([(namespace, key, value)])

    def put_many(self, ops: list[tuple[str, str, object]]) -> None:
        """Apply a batch atomically: one WAL record, all-or-nothing on crash."""
        normalized = [[ns, key, copy.deepcopy(value)] for ns, key, value in ops]
        with self._lock:
            self._commit(normalized)

    def get(self, namespace: str, key: str, default=None):
        with self._lock:
            value = self._data.get(namespace, {}).get(key)
        return copy.deepcopy(value) if value is not None else default

    def delete(self, namespace: str, key: str) -> None:
        self.put_many([(namespace, key, None)])

    def items(self, namespace: str) -> list[tuple[str, object]]:
        with self._lock:
            return sorted(copy.deepcopy(self._data.get(namespace, {})).items())

    def scan(self, namespace: str, prefix: str) -> list[tuple[str, object]]:
        return [(k, v) for k, v in self.items(namespace) if k.startswith(prefix)]

    # ------------------------------------------------------------ event log

    def append_event(self, user_id: str, event: dict) -> int:
        """Append to the per-user event log; sequence numbers are strictly
        increasing per user with no gaps."""
        with self._lock:
            counter_key = f"event_seq{SEP}{user_id}"
            seq = int(self._data["meta"].get(counter_key, 0)) + 1
            record = dict(copy.deepcopy(event), seq=seq)
            self._commit(
                [
                    ["events", f"{user_id}{SEP}{seq:010d}", record],
                    ["meta", counter_key, seq],
                ]
            )
            return seq

    def events(self, user_id: str) -> list[dict]:
        return [v for _, v in self.scan("events", f"{user_id}{SEP}")]

    # ------------------------------------------------------------ snapshots

    def snapshot(self) -> StoreSnapshot:
        with self._lock:
            return StoreSnapshot(copy.deepcopy(self._data))

    def compact(self) -> None:
        """Fold the WAL into a numbered snapshot file and truncate the log."""
        if self._dir is None:
            return
        with self._lock:
            snap_dir = self._dir / "snapshots"
            existing = [
                int(m.group(1))
                for p in snap_dir.iterdir()
                if (m := _SNAPSHOT_RE.match(p.name))
            ]
            next_id = max(existing, default=0) + 1
            target = snap_dir / f"{next_id:04d}.json"
            tmp = target.with_suffix(".tmp")
            tmp.write_text(json.dumps(self._data, sort_keys=True))
            os.replace(tmp, target)
            self._wal_file.close()
            self._wal_file = open(self._wal_path, "wb")
            for old in existing[:-1]:
                (snap_dir / f"{old:04d}.json").unlink(missing_ok=True)

    def close(self) -> None:
        with self._lock:
            if self._wal_file is not None:
                self._wal_file.close()
                self._wal_file = None

    # ------------------------------------------------------------ dump/load

    def export_dump(self) -> dict:
        with self._lock:
            return {"namespaces": copy.deepcopy(self._data)}

    def export_dump_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.export_dump(), indent=1, sort_keys=True))

    def import_dump(self, dump: dict) -> None:
        data = dump["namespaces"]
        with self._lock:
            ops = []
            for ns in NAMESPACES:
                for key in self._data[ns]:
                    ops.append([ns, key, None])
            for ns, records in data.items():
                if ns not in self._data:
                    raise StoreError(f"unknown namespace in dump: {ns}")
                for key, value in records.items():
                    ops.append([ns, key, value])
            self._commit(ops)

    def import_dump_file(self, path: str | Path) -> None:
        self.import_dump(json.loads(Path(path).read_text()))
