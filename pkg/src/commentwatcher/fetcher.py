"""Polite page fetching, thread pagination and keyword bulk fetching.

A fixture:// URL scheme resolves against a local fixtures directory so the
whole pipeline runs offline; http(s) URLs go through requests with
per-host politeness delays and retry with exponential backoff.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Protocol
from urllib.parse import urljoin, urlsplit

from .cleaner import RawPage, clean_html
from .model import CanonicalThread, utc
from .parser_engine import RawPost, assemble_thread, extract_page, resolve_name_mentions
from .sitedefs import DefinitionRegistry, Diagnostic, SiteDefinition
from .store import Store


class FetchError(Exception):
    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


class UnsupportedSiteError(FetchError):
    pass


class SearchError(Exception):
    pass


@dataclass(frozen=True)
class FetchPolicy:
    per_host_min_delay_ms: int = 1000
    max_retries: int = 2
    timeout_ms: int = 20000
    max_pages_per_thread: int = 50
    user_agent: str = "commentwatcher/0.1"


class Clock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)

    def utcnow(self) -> datetime:
        return datetime.now(timezone.utc).replace(microsecond=0)


class VirtualClock(Clock):
    """Deterministic clock for tests; sleep advances time instantly."""

    def __init__(self, start: float = 0.0,
                 start_utc: Optional[datetime] = None):
        self._t = start
        self._utc0 = start_utc or datetime(2013, 5, 2, tzinfo=timezone.utc)

    def now(self) -> float:
        return self._t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._t += seconds

    def utcnow(self) -> datetime:
        from datetime import timedelta
        return self._utc0 + timedelta(seconds=int(self._t))


class PolitenessGate:
    """Serializes requests per host and enforces a minimum inter-request
    start delay."""

    def __init__(self, clock: Clock):
        self.clock = clock
        self._lock = threading.Lock()
        self._host_locks: dict[str, threading.Lock] = {}
        self._last_start: dict[str, float] = {}

    def _lock_for(self, host: str) -> threading.Lock:
        with self._lock:
            return self._host_locks.setdefault(host, threading.Lock())

    def acquire(self, host: str, min_delay_s: float) -> None:
        with self._lock_for(host):
            last = self._last_start.get(host)
            now = self.clock.now()
            if last is not None and now - last < min_delay_s:
                self.clock.sleep(min_delay_s - (now - last))
            self._last_start[host] = self.clock.now()


class SearchProvider(Protocol):
    def search(self, keywords: str, limit: int) -> list[str]: ...


class FixtureSearchProvider:
    """Reads result URLs from a local file, one per line, order significant."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def search(self, keywords: str, limit: int) -> list[str]:
        if not self.path.exists():
            raise SearchError(f"fixture results file missing: {self.path}")
        urls = [line.strip() for line in self.path.read_text().splitlines()
                if line.strip() and not line.startswith("#")]
        return urls[:limit]


class LiveSearchProvider:
    """Generic JSON web-search client: GET endpoint?q=...&count=... with the
    API key from the named environment variable sent as a bearer token.
    Expects {"results": [{"url": "..."}]}."""

    def __init__(self, endpoint: str, api_key_env: str):
        self.endpoint = endpoint
        self.api_key_env = api_key_env

    def search(self, keywords: str, limit: int) -> list[str]:
        import os
        import requests
        headers = {}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.get(self.endpoint, params={"q": keywords, "count": limit},
                                headers=headers, timeout=30)
            resp.raise_for_status()
            results = resp.json().get("results", [])
        except Exception as e:
            raise SearchError(str(e)) from e
        return [r["url"] for r in results if "url" in r][:limit]


@dataclass
class BulkFetchReport:
    keywords: str
    urls_found: int = 0
    urls_supported: int = 0
    threads_stored: list[str] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "keywords": self.keywords,
            "urls_found": self.urls_found,
            "urls_supported": self.urls_supported,
            "threads_stored": list(self.threads_stored),
            "failures": [list(f) for f in self.failures],
        }


def _strip_fragment(url: str) -> str:
    return url.split("#", 1)[0]


def _join(base: str, rel: str) -> str:
    # urljoin ignores relative references for schemes it does not know,
    # so resolve fixture:// URLs through a known scheme
    if base.startswith("fixture://"):
        joined = urljoin("http://" + base[len("fixture://"):], rel)
        return "fixture://" + joined[len("http://"):]
    return urljoin(base, rel)


class Fetcher:
    def __init__(
        self,
        registry: DefinitionRegistry,
        policy: FetchPolicy = FetchPolicy(),
        fixtures_dir: Optional[str | Path] = None,
        clock: Optional[Clock] = None,
    ):
        self.registry = registry
        self.policy = policy
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.clock = clock or Clock()
        self.gate = PolitenessGate(self.clock)

    # -- single page -------------------------------------------------------

    def fetch_page(self, url: str) -> RawPage:
        parts = urlsplit(url)
        host = parts.hostname or ""
        if not host:
            raise FetchError(f"not an absolute URL: {url!r}")
        self.gate.acquire(host, self.policy.per_host_min_delay_ms / 1000.0)
        if parts.scheme == "fixture":
            return self._fetch_fixture(url, parts)
        if parts.scheme in ("http", "https"):
            return self._fetch_http(url)
        raise FetchError(f"unsupported URL scheme {parts.scheme!r}")

    def _fetch_fixture(self, url: str, parts) -> RawPage:
        if self.fixtures_dir is None:
            raise FetchError("fixture URL but no fixtures directory configured")
        rel = (parts.hostname or "") + parts.path
        path = self.fixtures_dir / rel.lstrip("/")
        if not path.exists():
            raise FetchError(f"fixture not found: {path}", status=404)
        return RawPage(url=url, body=path.read_bytes(), fetched_at=self.clock.utcnow())

    def _fetch_http(self, url: str) -> RawPage:
        import requests
        last_error: Optional[Exception] = None
        for attempt in range(self.policy.max_retries + 1):
            if attempt:
                self.clock.sleep(0.5 * (2 ** (attempt - 1)))
            try:
                resp = requests.get(
                    url,
                    headers={"User-Agent": self.policy.user_agent},
                    timeout=self.policy.timeout_ms / 1000.0,
                )
            except requests.Timeout as e:
                last_error = FetchError(f"timeout fetching {url}", status=None)
                continue
            except requests.RequestException as e:
                last_error = FetchError(f"fetch failed: {e}")
                continue
            if resp.status_code >= 500:
                last_error = FetchError(f"status {resp.status_code} for {url}",
                                        status=resp.status_code)
                continue
            if resp.status_code >= 400:
                raise FetchError(f"status {resp.status_code} for {url}",
                                 status=resp.status_code)
            return RawPage(url=url, body=resp.content,
                           fetched_at=self.clock.utcnow())
        raise last_error or FetchError(f"fetch failed: {url}")

    # -- whole thread with pagination ---------------------------------------

    def fetch_thread(self, url: str) -> tuple[CanonicalThread, list[Diagnostic]]:
        definition = self.registry.match_site(url)
        if definition is None:
            raise UnsupportedSiteError(f"no site definition matches {url!r}")

        diags: list[Diagnostic] = []
        raw_posts: list[RawPost] = []
        title = ""
        fetched_at = None
        visited: set[str] = set()
        page_url: Optional[str] = url
        pages = 0
        while page_url and pages < self.policy.max_pages_per_thread:
            if _strip_fragment(page_url) in visited:
                break
            visited.add(_strip_fragment(page_url))
            page = self.fetch_page(page_url)
            if fetched_at is None:
                fetched_at = page.fetched_at
            extraction = extract_page(clean_html(page), definition)
            diags.extend(extraction.diagnostics)
            if pages == 0:
                title = extraction.title
                if extraction.failed and not extraction.posts:
                    raise FetchError(
                        "extraction failed: "
                        + "; ".join(str(d) for d in extraction.diagnostics
                                    if d.severity == "error"))
            for rp in extraction.posts:
                rp.page_order += pages * 1_000_000  # keep page order across pages
                raw_posts.append(rp)
            page_url = (_join(page_url, extraction.next_page_url)
                        if extraction.next_page_url else None)
            pages += 1

        thread, assembly_diags = assemble_thread(
            _strip_fragment(url), definition, fetched_at or self.clock.utcnow(),
            title, raw_posts)
        return resolve_name_mentions(thread), diags + assembly_diags

    # -- keyword bulk fetch ---------------------------------------------------

    def bulk_fetch(
        self,
        keywords: str,
        limit: int,
        provider: SearchProvider,
        store: Store,
    ) -> BulkFetchReport:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        urls = provider.search(keywords, limit)
        report = BulkFetchReport(keywords=keywords, urls_found=len(urls))
        for url in urls:
            try:
                if self.registry.match_site(url) is None:
                    continue
            except Exception:
                continue
            report.urls_supported += 1
            existing = store.has_url(_strip_fragment(url))
            if existing is not None:
                report.threads_stored.append(existing)
                continue
            try:
                thread, _ = self.fetch_thread(url)
                report.threads_stored.append(store.put_thread(thread))
            except Exception as e:
                report.failures.append((url, str(e)))
        return report
