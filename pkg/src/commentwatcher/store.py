"""Embedded directory-backed system of record.

Threads, site-definition runs and extraction records live as files under
one root directory; every write goes through an atomic same-directory
rename so a crash leaves either the old or the new content, never a torn
file.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

from .model import (
    CanonicalThread,
    deserialize_thread,
    format_ts,
    parse_ts,
    serialize_thread,
    thread_statistics,
    utc,
)

SCHEMA_VERSION = 1

STATUS_PENDING = "pending"
STATUS_RUNNING = "running"
STATUS_DONE = "done"
STATUS_FAILED = "failed"

_TRANSITIONS = {
    STATUS_PENDING: {STATUS_RUNNING},
    STATUS_RUNNING: {STATUS_DONE, STATUS_FAILED},
    STATUS_DONE: set(),
    STATUS_FAILED: set(),
}


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class StateError(StoreError):
    pass


class SchemaVersionError(StoreError):
    pass


@dataclass(frozen=True)
class ThreadSummary:
    thread_id: str
    title: str
    site_id: str
    source_url: str
    post_count: int
    first_post: Optional[datetime]
    last_post: Optional[datetime]
    fetched_at: datetime
    revision: int


@dataclass(frozen=True)
class ExtractionRecord:
    extraction_id: str
    thread_ids: tuple[str, ...]
    algorithm: str  # "tng" | "ckp"
    params: dict
    status: str = STATUS_PENDING
    result: Optional[bytes] = None
    error: Optional[str] = None
    created_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.threads_dir = self.root / "threads"
        self.extractions_dir = self.root / "extractions"
        version_file = self.root / "VERSION"
        if version_file.exists():
            found = int(version_file.read_text().strip())
            if found != SCHEMA_VERSION:
                raise SchemaVersionError(
                    f"store schema {found} != expected {SCHEMA_VERSION}")
        else:
            self.root.mkdir(parents=True, exist_ok=True)
            self.threads_dir.mkdir(exist_ok=True)
            self.extractions_dir.mkdir(exist_ok=True)
            _atomic_write(version_file, f"{SCHEMA_VERSION}\n".encode())
        self.threads_dir.mkdir(exist_ok=True)
        self.extractions_dir.mkdir(exist_ok=True)
        self._lock = threading.RLock()

    # -- threads ---------------------------------------------------------

    def _thread_id_for_url(self, url: str) -> Optional[str]:
        url = url.split("#", 1)[0]
        for meta_path in self.threads_dir.glob("*.json"):
            meta = json.loads(meta_path.read_text())
            if meta["source_url"].split("#", 1)[0] == url:
                return meta["thread_id"]
        return None

    def put_thread(self, t: CanonicalThread) -> str:
        """Upsert by source_url. Identical content is a no-op; changed
        content replaces it and bumps the revision counter."""
        with self._lock:
            data = serialize_thread(t)
            existing_id = self._thread_id_for_url(t.source_url)
            thread_id = existing_id or t.thread_id
            xml_path = self.threads_dir / f"{thread_id}.xml"
            meta_path = self.threads_dir / f"{thread_id}.json"
            revision = 1
            if existing_id is not None:
                old_meta = json.loads(meta_path.read_text())
                old = xml_path.read_bytes()
                # compare ignoring fetched_at: a refetch of unchanged content
                # must not bump the revision
                stored = replace(t, thread_id=existing_id,
                                 fetched_at=deserialize_thread(old).fetched_at)
                if serialize_thread(stored) == old:
                    return existing_id
                revision = old_meta["revision"] + 1
                data = serialize_thread(replace(t, thread_id=existing_id))
            count, _, span = thread_statistics(t)
            meta = {
                "thread_id": thread_id,
                "source_url": t.source_url,
                "site_id": t.site_id,
                "title": t.title,
                "post_count": count,
                "first_post": format_ts(span[0]) if span else None,
                "last_post": format_ts(span[1]) if span else None,
                "fetched_at": format_ts(t.fetched_at),
                "revision": revision,
            }
            _atomic_write(xml_path, data)
            _atomic_write(meta_path, json.dumps(meta, sort_keys=True).encode())
            return thread_id

    def get_thread(self, thread_id: str) -> CanonicalThread:
        path = self.threads_dir / f"{thread_id}.xml"
        if not path.exists():
            raise NotFoundError(f"thread {thread_id!r}")
        return deserialize_thread(path.read_bytes())

    def get_thread_bytes(self, thread_id: str) -> bytes:
        path = self.threads_dir / f"{thread_id}.xml"
        if not path.exists():
            raise NotFoundError(f"thread {thread_id!r}")
        return path.read_bytes()

    def has_url(self, url: str) -> Optional[str]:
        with self._lock:
            return self._thread_id_for_url(url)

    def list_threads(
        self,
        site_id: Optional[str] = None,
        url_substring: Optional[str] = None,
        date_range: Optional[tuple[datetime, datetime]] = None,
    ) -> list[ThreadSummary]:
        out = []
        for meta_path in self.threads_dir.glob("*.json"):
            m = json.loads(meta_path.read_text())
            if site_id is not None and m["site_id"] != site_id:
                continue
            if url_substring is not None and url_substring not in m["source_url"]:
                continue
            fetched = parse_ts(m["fetched_at"])
            if date_range is not None:
                lo, hi = date_range
                if not (utc(lo) <= fetched <= utc(hi)):
                    continue
            out.append(ThreadSummary(
                thread_id=m["thread_id"],
                title=m["title"],
                site_id=m["site_id"],
                source_url=m["source_url"],
                post_count=m["post_count"],
                first_post=parse_ts(m["first_post"]) if m["first_post"] else None,
                last_post=parse_ts(m["last_post"]) if m["last_post"] else None,
                fetched_at=fetched,
                revision=m["revision"],
            ))
        out.sort(key=lambda s: (s.fetched_at, s.thread_id), reverse=True)
        return out

    def revision(self, thread_id: str) -> int:
        meta_path = self.threads_dir / f"{thread_id}.json"
        if not meta_path.exists():
            raise NotFoundError(f"thread {thread_id!r}")
        return json.loads(meta_path.read_text())["revision"]

    # -- extraction records ------------------------------------------------

    def _extraction_paths(self, extraction_id: str) -> tuple[Path, Path]:
        return (self.extractions_dir / f"{extraction_id}.json",
                self.extractions_dir / f"{extraction_id}.result.xml")

    def put_extraction(self, rec: ExtractionRecord) -> str:
        with self._lock:
            for tid in rec.thread_ids:
                if not (self.threads_dir / f"{tid}.xml").exists():
                    raise NotFoundError(f"thread {tid!r}")
            extraction_id = rec.extraction_id or uuid.uuid4().hex[:12]
            rec = replace(rec, extraction_id=extraction_id)
            self._write_extraction(rec)
            return extraction_id

    def _write_extraction(self, rec: ExtractionRecord) -> None:
        meta_path, result_path = self._extraction_paths(rec.extraction_id)
        doc = {
            "extraction_id": rec.extraction_id,
            "thread_ids": list(rec.thread_ids),
            "algorithm": rec.algorithm,
            "params": rec.params,
            "status": rec.status,
            "error": rec.error,
            "created_at": format_ts(rec.created_at) if rec.created_at else None,
            "finished_at": format_ts(rec.finished_at) if rec.finished_at else None,
            "has_result": rec.result is not None,
        }
        if rec.result is not None:
            _atomic_write(result_path, rec.result)
        _atomic_write(meta_path, json.dumps(doc, sort_keys=True).encode())

    def get_extraction(self, extraction_id: str) -> ExtractionRecord:
        meta_path, result_path = self._extraction_paths(extraction_id)
        if not meta_path.exists():
            raise NotFoundError(f"extraction {extraction_id!r}")
        doc = json.loads(meta_path.read_text())
        result = result_path.read_bytes() if doc["has_result"] else None
        return ExtractionRecord(
            extraction_id=doc["extraction_id"],
            thread_ids=tuple(doc["thread_ids"]),
            algorithm=doc["algorithm"],
            params=doc["params"],
            status=doc["status"],
            result=result,
            error=doc["error"],
            created_at=parse_ts(doc["created_at"]) if doc["created_at"] else None,
            finished_at=parse_ts(doc["finished_at"]) if doc["finished_at"] else None,
        )

    def update_extraction_status(
        self,
        extraction_id: str,
        status: str,
        result: Optional[bytes] = None,
        error: Optional[str] = None,
        finished_at: Optional[datetime] = None,
    ) -> ExtractionRecord:
        with self._lock:
            rec = self.get_extraction(extraction_id)
            if status not in _TRANSITIONS.get(rec.status, set()):
                raise StateError(f"illegal transition {rec.status} -> {status}")
            if status == STATUS_DONE and result is None:
                raise StateError("done requires a result")
            rec = replace(rec, status=status,
                          result=result if result is not None else rec.result,
                          error=error,
                          finished_at=finished_at if status in (STATUS_DONE, STATUS_FAILED) else None)
            self._write_extraction(rec)
            return rec

    def list_extractions(self) -> list[ExtractionRecord]:
        ids = sorted(p.stem for p in self.extractions_dir.glob("*.json"))
        return [self.get_extraction(i) for i in ids]
