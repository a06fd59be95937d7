"""HTTP service exposing fetching, extraction jobs and derived views.

Single-operator service, unauthenticated, loopback by default. Extraction
and bulk fetches run on a bounded worker pool and are polled through job
tickets; single-thread fetches are synchronous.
"""
from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional
from urllib.parse import urlsplit

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from . import jobs as jobs_mod
from .config import Config
from .fetcher import (
    FetchError,
    Fetcher,
    FetchPolicy,
    FixtureSearchProvider,
    LiveSearchProvider,
    SearchError,
    UnsupportedSiteError,
)
from .model import format_ts
from .sitedefs import DefinitionError, DefinitionRegistry
from .store import (
    STATUS_DONE,
    STATUS_FAILED,
    STATUS_PENDING,
    STATUS_RUNNING,
    ExtractionRecord,
    NotFoundError,
    Store,
)
from .topics import ParameterError
from .views import network_document, timeline_document, topics_document


@dataclass
class JobTicket:
    job_id: str
    kind: str  # "bulk_fetch" | "extraction"
    status: str = STATUS_PENDING
    error: Optional[str] = None
    report: Optional[dict] = None
    extraction_id: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"job_id": self.job_id, "kind": self.kind, "status": self.status}
        if self.error is not None:
            out["error"] = self.error
        if self.report is not None:
            out["report"] = self.report
        if self.extraction_id is not None:
            out["extraction_id"] = self.extraction_id
        return out


class AppState:
    def __init__(self, config: Config):
        self.config = config
        self.store = Store(config.get("store.root"))
        self.registry = DefinitionRegistry(config.get("definitions.dir"))
        policy = FetchPolicy(
            per_host_min_delay_ms=config.get_int("fetch.min_delay_ms"),
            max_retries=config.get_int("fetch.max_retries"),
            timeout_ms=config.get_int("fetch.timeout_ms"),
            max_pages_per_thread=config.get_int("fetch.max_pages_per_thread"),
            user_agent=config.get("fetch.user_agent"),
        )
        self.fetcher = Fetcher(self.registry, policy,
                               fixtures_dir=config.get("fixtures.dir"))
        self.executor = ThreadPoolExecutor(max_workers=config.get_int("server.workers"))
        self.jobs: dict[str, JobTicket] = {}
        self.jobs_lock = threading.Lock()

    def search_provider(self):
        if self.config.get("search.provider") == "fixture":
            return FixtureSearchProvider(self.config.get("search.fixture_file"))
        return LiveSearchProvider(self.config.get("search.endpoint"),
                                  self.config.get("search.api_key_env"))

    def new_ticket(self, kind: str, **extra) -> JobTicket:
        ticket = JobTicket(job_id=uuid.uuid4().hex[:12], kind=kind, **extra)
        with self.jobs_lock:
            self.jobs[ticket.job_id] = ticket
        return ticket


def _thread_summary_dict(s) -> dict:
    return {
        "thread_id": s.thread_id,
        "title": s.title,
        "site_id": s.site_id,
        "source_url": s.source_url,
        "post_count": s.post_count,
        "first_post": format_ts(s.first_post) if s.first_post else None,
        "last_post": format_ts(s.last_post) if s.last_post else None,
        "fetched_at": format_ts(s.fetched_at),
        "revision": s.revision,
    }


def _error(status: int, code: str, message: str = "") -> JSONResponse:
    return JSONResponse({"error": code, "message": message}, status_code=status)


def create_app(config: Optional[Config] = None) -> FastAPI:
    state = AppState(config or Config())
    app = FastAPI(title="commentwatcher")
    app.state.cw = state

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/fetch", status_code=201)
    def fetch(payload: dict):
        url = payload.get("url")
        if not url or not isinstance(url, str) or not urlsplit(url).netloc:
            return _error(400, "malformed-url", repr(url))
        try:
            thread, diags = state.fetcher.fetch_thread(url)
        except UnsupportedSiteError as e:
            return _error(422, "unsupported-site", str(e))
        except FetchError as e:
            return _error(502, "fetch-failed", str(e))
        thread_id = state.store.put_thread(thread)
        warnings = [str(d) for d in diags if d.severity == "warning"]
        return {"thread_id": thread_id, "title": thread.title,
                "site_id": thread.site_id, "post_count": len(thread.posts),
                "warnings": warnings}

    @app.post("/api/fetch/bulk", status_code=202)
    def fetch_bulk(payload: dict):
        keywords = payload.get("keywords")
        if not keywords or not isinstance(keywords, str):
            return _error(400, "missing-keywords")
        limit = int(payload.get("limit", 20))
        if limit < 1:
            return _error(400, "bad-limit")
        ticket = state.new_ticket("bulk_fetch")

        def run():
            ticket.status = STATUS_RUNNING
            try:
                report = state.fetcher.bulk_fetch(
                    keywords, limit, state.search_provider(), state.store)
                ticket.report = report.to_dict()
                ticket.status = STATUS_DONE
            except (SearchError, Exception) as e:
                ticket.error = str(e)
                ticket.status = STATUS_FAILED

        state.executor.submit(run)
        return ticket.to_dict()

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        ticket = state.jobs.get(job_id)
        if ticket is None:
            return _error(404, "unknown-job", job_id)
        return ticket.to_dict()

    @app.get("/api/threads")
    def list_threads(site_id: Optional[str] = None,
                     url_substring: Optional[str] = None):
        summaries = state.store.list_threads(site_id=site_id,
                                             url_substring=url_substring)
        return {"threads": [_thread_summary_dict(s) for s in summaries]}

    @app.get("/api/threads/{thread_id}")
    def get_thread(thread_id: str):
        try:
            data = state.store.get_thread_bytes(thread_id)
        except NotFoundError:
            return _error(404, "unknown-thread", thread_id)
        return Response(content=data, media_type="application/xml")

    @app.post("/api/extractions", status_code=202)
    def create_extraction(payload: dict):
        algorithm = payload.get("algorithm")
        if algorithm not in jobs_mod.ALGORITHMS:
            return _error(400, "unknown-algorithm", repr(algorithm))
        thread_ids = payload.get("thread_ids")
        if not thread_ids or not isinstance(thread_ids, list):
            return _error(400, "missing-thread-ids")
        try:
            params = jobs_mod.validate_params(algorithm, payload.get("params", {}))
        except ParameterError as e:
            return _error(422, "invalid-params", str(e))
        now = datetime.now(timezone.utc).replace(microsecond=0)
        try:
            extraction_id = state.store.put_extraction(ExtractionRecord(
                extraction_id="", thread_ids=tuple(thread_ids),
                algorithm=algorithm, params=params, created_at=now))
        except NotFoundError as e:
            return _error(404, "unknown-thread", str(e))
        ticket = state.new_ticket("extraction", extraction_id=extraction_id)

        def run():
            ticket.status = STATUS_RUNNING
            try:
                jobs_mod.run_extraction(state.store, extraction_id)
                ticket.status = STATUS_DONE
            except Exception as e:
                ticket.error = str(e)
                ticket.status = STATUS_FAILED

        state.executor.submit(run)
        return ticket.to_dict()

    @app.get("/api/extractions/{extraction_id}")
    def get_extraction(extraction_id: str):
        try:
            rec = state.store.get_extraction(extraction_id)
        except NotFoundError:
            return _error(404, "unknown-extraction", extraction_id)
        return {
            "extraction_id": rec.extraction_id,
            "thread_ids": list(rec.thread_ids),
            "algorithm": rec.algorithm,
            "params": rec.params,
            "status": rec.status,
            "error": rec.error,
            "created_at": format_ts(rec.created_at) if rec.created_at else None,
            "finished_at": format_ts(rec.finished_at) if rec.finished_at else None,
        }

    def _done_record(extraction_id: str):
        try:
            rec = state.store.get_extraction(extraction_id)
        except NotFoundError:
            return None, _error(404, "unknown-extraction", extraction_id)
        if rec.status in (STATUS_PENDING, STATUS_RUNNING):
            return None, _error(409, "extraction-not-finished", rec.status)
        if rec.status == STATUS_FAILED:
            return None, _error(409, "extraction-failed", rec.error or "")
        return rec, None

    @app.get("/api/extractions/{extraction_id}/topics")
    def view_topics(extraction_id: str):
        rec, err = _done_record(extraction_id)
        if err:
            return err
        return Response(content=topics_document(rec), media_type="application/xml")

    @app.get("/api/extractions/{extraction_id}/network")
    def view_network(extraction_id: str, topics: Optional[str] = None,
                     keep_isolated: bool = False):
        rec, err = _done_record(extraction_id)
        if err:
            return err
        topic_set = None
        if topics is not None:
            try:
                topic_set = {int(t) for t in topics.split(",") if t != ""}
            except ValueError:
                return _error(422, "bad-topic-filter", topics)
        doc = network_document(state.store, rec, topic_set, keep_isolated)
        return Response(content=doc, media_type="text/plain; charset=utf-8")

    @app.get("/api/extractions/{extraction_id}/timeline")
    def view_timeline(extraction_id: str, intervals: int = 8,
                      group_by: str = "forum"):
        rec, err = _done_record(extraction_id)
        if err:
            return err
        if intervals < 1:
            return _error(422, "bad-intervals", str(intervals))
        if group_by not in ("forum", "site"):
            return _error(422, "bad-group-by", group_by)
        doc = timeline_document(state.store, rec, intervals, group_by)
        return Response(content=doc, media_type="text/plain; charset=utf-8")

    @app.get("/api/sources")
    def list_sources():
        return {"sources": [
            {"site_id": d.site_id, "host_patterns": list(d.host_patterns),
             "version": d.version}
            for d in state.registry.all()]}

    @app.post("/api/sources", status_code=201)
    async def add_source(request: Request):
        text = (await request.body()).decode("utf-8")
        try:
            d = state.registry.add(text)
        except DefinitionError as e:
            return _error(422, "invalid-definition", str(e))
        return {"site_id": d.site_id, "host_patterns": list(d.host_patterns)}

    ui_dir = Path(state.config.get("ui.dist_dir"))
    if ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
