"""Headless command-line surface mirroring the HTTP API.

The view commands (topics, network, timeline) and threads export print
exactly the documents the corresponding HTTP endpoints return.
"""
from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import jobs as jobs_mod
from .config import Config
from .fetcher import FetchError, Fetcher, FetchPolicy, UnsupportedSiteError
from .model import format_ts
from .sitedefs import DefinitionError, DefinitionRegistry, lint_definition, parse_definition
from .store import ExtractionRecord, NotFoundError, Store
from .topics import ParameterError
from .views import network_document, timeline_document, topics_document


class Context:
    def __init__(self, config: Config):
        self.config = config

    @property
    def store(self) -> Store:
        return Store(self.config.get("store.root"))

    @property
    def registry(self) -> DefinitionRegistry:
        return DefinitionRegistry(self.config.get("definitions.dir"))

    def fetcher(self) -> Fetcher:
        c = self.config
        policy = FetchPolicy(
            per_host_min_delay_ms=c.get_int("fetch.min_delay_ms"),
            max_retries=c.get_int("fetch.max_retries"),
            timeout_ms=c.get_int("fetch.timeout_ms"),
            max_pages_per_thread=c.get_int("fetch.max_pages_per_thread"),
            user_agent=c.get("fetch.user_agent"),
        )
        return Fetcher(self.registry, policy, fixtures_dir=c.get("fixtures.dir"))

    def search_provider(self):
        from .fetcher import FixtureSearchProvider, LiveSearchProvider
        if self.config.get("search.provider") == "fixture":
            return FixtureSearchProvider(self.config.get("search.fixture_file"))
        return LiveSearchProvider(self.config.get("search.endpoint"),
                                  self.config.get("search.api_key_env"))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Path to a key = value config file.")
@click.pass_context
def main(ctx, config_path):
    """CommentWatcher: fetch forum discussions, extract topics, analyze the
    reply network."""
    ctx.obj = Context(Config.load(config_path))


def _write(data: bytes) -> None:
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()


@main.command()
@click.argument("url")
@click.pass_obj
def fetch(ctx: Context, url):
    """Fetch one forum thread URL into the store."""
    try:
        thread, diags = ctx.fetcher().fetch_thread(url)
    except UnsupportedSiteError as e:
        raise click.ClickException(f"unsupported site: {e}")
    except FetchError as e:
        raise click.ClickException(str(e))
    thread_id = ctx.store.put_thread(thread)
    for d in diags:
        if d.severity == "warning":
            click.echo(f"warning: {d}", err=True)
    click.echo(thread_id)


@main.command("fetch-bulk")
@click.argument("keywords")
@click.option("--limit", default=20, show_default=True)
@click.pass_obj
def fetch_bulk(ctx: Context, keywords, limit):
    """Keyword web search, then fetch every result on a supported site."""
    report = ctx.fetcher().bulk_fetch(keywords, limit, ctx.search_provider(), ctx.store)
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))


@main.group()
def sources():
    """Manage site definition files."""


@sources.command("list")
@click.pass_obj
def sources_list(ctx: Context):
    for d in ctx.registry.all():
        click.echo(f"{d.site_id}\t{','.join(d.host_patterns)}\tv{d.version}")


@sources.command("add")
@click.argument("path", type=click.Path(exists=True))
@click.pass_obj
def sources_add(ctx: Context, path):
    try:
        d = ctx.registry.add(Path(path).read_text(encoding="utf-8"))
    except DefinitionError as e:
        raise click.ClickException(str(e))
    click.echo(d.site_id)


@sources.command("lint")
@click.argument("path", type=click.Path(exists=True))
@click.pass_obj
def sources_lint(ctx: Context, path):
    try:
        d = parse_definition(Path(path).read_text(encoding="utf-8"))
    except DefinitionError as e:
        raise click.ClickException(str(e))
    diags = lint_definition(d)
    for diag in diags:
        click.echo(str(diag))
    if any(x.severity == "error" for x in diags):
        sys.exit(1)
    click.echo("ok")


@main.group()
def threads():
    """Inspect and export stored threads."""


@threads.command("list")
@click.option("--site-id", default=None)
@click.option("--url-substring", default=None)
@click.pass_obj
def threads_list(ctx: Context, site_id, url_substring):
    for s in ctx.store.list_threads(site_id=site_id, url_substring=url_substring):
        click.echo(f"{s.thread_id}\t{s.site_id}\t{s.post_count}\t{s.title}")


@threads.command("export")
@click.argument("thread_id")
@click.pass_obj
def threads_export(ctx: Context, thread_id):
    """Print the canonical interchange document for one thread."""
    try:
        _write(ctx.store.get_thread_bytes(thread_id))
    except NotFoundError as e:
        raise click.ClickException(str(e))


@main.command()
@click.option("--algorithm", type=click.Choice(["tng", "ckp"]), required=True)
@click.option("--thread-id", "thread_ids", multiple=True, required=True)
@click.option("--param", "params", multiple=True,
              help="name=value, repeatable (k, seed, iterations, ...)")
@click.pass_obj
def extract(ctx: Context, algorithm, thread_ids, params):
    """Run a topic extraction synchronously; prints the extraction id."""
    raw = {}
    for p in params:
        if "=" not in p:
            raise click.ClickException(f"bad --param {p!r}, expected name=value")
        name, _, value = p.partition("=")
        raw[name.strip()] = value.strip()
    try:
        validated = jobs_mod.validate_params(algorithm, raw)
    except (ParameterError, ValueError) as e:
        raise click.ClickException(str(e))
    store = ctx.store
    now = datetime.now(timezone.utc).replace(microsecond=0)
    try:
        extraction_id = store.put_extraction(ExtractionRecord(
            extraction_id="", thread_ids=tuple(thread_ids),
            algorithm=algorithm, params=validated, created_at=now))
    except NotFoundError as e:
        raise click.ClickException(str(e))
    try:
        jobs_mod.run_extraction(store, extraction_id)
    except Exception as e:
        raise click.ClickException(f"extraction failed: {e}")
    click.echo(extraction_id)


def _done_record(store: Store, extraction_id: str) -> ExtractionRecord:
    try:
        rec = store.get_extraction(extraction_id)
    except NotFoundError as e:
        raise click.ClickException(str(e))
    if rec.status != "done":
        raise click.ClickException(f"extraction is {rec.status}")
    return rec


@main.command()
@click.argument("extraction_id")
@click.pass_obj
def topics(ctx: Context, extraction_id):
    """Print the unified topic result document."""
    _write(topics_document(_done_record(ctx.store, extraction_id)))


@main.command()
@click.argument("extraction_id")
@click.option("--topics", "topic_filter", default=None,
              help="Comma-separated topic ids to keep.")
@click.option("--keep-isolated", is_flag=True, default=False)
@click.pass_obj
def network(ctx: Context, extraction_id, topic_filter, keep_isolated):
    """Print the graph-exchange export of the reply network."""
    store = ctx.store
    rec = _done_record(store, extraction_id)
    topic_set = None
    if topic_filter is not None:
        topic_set = {int(t) for t in topic_filter.split(",") if t != ""}
    _write(network_document(store, rec, topic_set, keep_isolated))


@main.command()
@click.argument("extraction_id")
@click.option("--intervals", default=8, show_default=True)
@click.option("--group-by", type=click.Choice(["forum", "site"]), default="forum",
              show_default=True)
@click.pass_obj
def timeline(ctx: Context, extraction_id, intervals, group_by):
    """Print the tabular per-topic timeline."""
    store = ctx.store
    rec = _done_record(store, extraction_id)
    _write(timeline_document(store, rec, intervals, group_by))


@main.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.pass_obj
def serve(ctx: Context, host, port):
    """Run the HTTP API (and the UI bundle, when built)."""
    import uvicorn
    from .api import create_app
    app = create_app(ctx.config)
    uvicorn.run(app,
                host=host or ctx.config.get("server.host"),
                port=port or ctx.config.get_int("server.port"))


if __name__ == "__main__":
    main()
