from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from commentwatcher.cleaner import RawPage, clean_html
from commentwatcher.fetcher import Fetcher, FetchPolicy, VirtualClock
from commentwatcher.model import CanonicalThread, Post
from commentwatcher.parser_engine import apply_definition
from commentwatcher.sitedefs import DefinitionRegistry
from commentwatcher.store import Store

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
DEFINITIONS = REPO / "definitions"
GOLDEN = Path(__file__).resolve().parent / "golden"

FETCHED_AT = datetime(2013, 5, 2, tzinfo=timezone.utc)


@pytest.fixture
def registry():
    return DefinitionRegistry(DEFINITIONS)


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store")


@pytest.fixture
def fetcher(registry):
    return Fetcher(registry, FetchPolicy(per_host_min_delay_ms=0),
                   fixtures_dir=FIXTURES, clock=VirtualClock())


def parse_fixture(host: str, page: str, registry: DefinitionRegistry):
    """clean + apply_definition for one fixture page, fixed fetched_at."""
    url = f"fixture://{host}/{page}"
    body = (FIXTURES / host / page).read_bytes()
    definition = registry.match_site(url)
    assert definition is not None
    doc = clean_html(RawPage(url, body, FETCHED_AT))
    thread, diags = apply_definition(doc, definition, FETCHED_AT)
    return thread, diags


def ts(hours: float) -> datetime:
    return datetime(2013, 4, 1, tzinfo=timezone.utc) + timedelta(hours=hours)


def make_post(post_id, author, hours, content="hello world",
              reply_to=None, evidence="structural"):
    return Post(post_id, author, ts(hours), content, reply_to,
                evidence if reply_to else "none")


def make_thread(thread_id="t1", posts=(), title="A thread",
                site_id="sitea", url=None):
    return CanonicalThread(
        thread_id=thread_id,
        source_url=url or f"fixture://forum-a.example/{thread_id}.html",
        site_id=site_id,
        title=title,
        fetched_at=FETCHED_AT,
        posts=tuple(posts),
    )


def pytest_terminal_summary(terminalreporter):
    # one pass/fail line per acceptance criterion, printed outside capture
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    for name, verdict in RESULTS:
        terminalreporter.write_line(f"[ACCEPTANCE] {name}: {verdict}")
