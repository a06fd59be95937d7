"""Hot-loadable declarative site definitions.

One definition file per supported website maps that site's HTML structure
onto the canonical schema. The engine itself contains no site-specific
code; supporting a new site means dropping a new file in the definitions
directory.

File format (key = value lines, [section] headers, '#' comments):

    site_id = sitea
    host_patterns = forum-a.example, *.forum-a.example
    version = 1

    [thread]
    title_selector = //div[@class='title']
    post_list_selector = //div[@class='post']
    next_page_selector = //a[@rel='next']/@href

    [post]
    id_selector = @id
    author_selector = .//span[@class='author']
    timestamp_selector = .//span[@class='date']
    timestamp_formats = %Y-%m-%d %H:%M | %d %b %Y %H:%M
    content_selector = .//div[@class='body']
    reply_link_selector = .//a[@class='reply']/@href

timestamp_formats are tried in order ('|' separated, strptime syntax).
"""
from __future__ import annotations

import fnmatch
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.parse import urlsplit

from .selectors import SelectorError, parse_selector


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    selector: str = ""
    context: str = ""

    def __str__(self) -> str:
        parts = [self.severity, self.code]
        if self.selector:
            parts.append(repr(self.selector))
        if self.context:
            parts.append(self.context)
        return ": ".join(parts)


class DefinitionError(Exception):
    pass


class AmbiguityError(DefinitionError):
    pass


@dataclass(frozen=True)
class ThreadRules:
    title_selector: str
    post_list_selector: str
    next_page_selector: Optional[str] = None


@dataclass(frozen=True)
class PostRules:
    author_selector: str
    timestamp_selector: str
    timestamp_formats: tuple[str, ...]
    content_selector: str
    id_selector: Optional[str] = None
    reply_link_selector: Optional[str] = None


@dataclass(frozen=True)
class SiteDefinition:
    site_id: str
    host_patterns: tuple[str, ...]
    thread_rules: ThreadRules
    post_rules: PostRules
    version: int = 1


_SELECTOR_KEYS = {
    ("thread", "title_selector"),
    ("thread", "post_list_selector"),
    ("thread", "next_page_selector"),
    ("post", "id_selector"),
    ("post", "author_selector"),
    ("post", "timestamp_selector"),
    ("post", "content_selector"),
    ("post", "reply_link_selector"),
}


def _parse_kv(text: str) -> dict[tuple[str, str], str]:
    values: dict[tuple[str, str], str] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise DefinitionError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[(section, key.strip())] = value.strip()
    return values


def parse_definition(text: str) -> SiteDefinition:
    kv = _parse_kv(text)

    def req(section: str, key: str) -> str:
        try:
            return kv[(section, key)]
        except KeyError:
            raise DefinitionError(f"missing {section + '.' if section else ''}{key}")

    site_id = req("", "site_id")
    patterns = tuple(p.strip() for p in req("", "host_patterns").split(",") if p.strip())
    if not patterns:
        raise DefinitionError("host_patterns is empty")
    formats = tuple(f.strip() for f in req("post", "timestamp_formats").split("|") if f.strip())
    if not formats:
        raise DefinitionError("timestamp_formats is empty")
    return SiteDefinition(
        site_id=site_id,
        host_patterns=patterns,
        version=int(kv.get(("", "version"), "1")),
        thread_rules=ThreadRules(
            title_selector=req("thread", "title_selector"),
            post_list_selector=req("thread", "post_list_selector"),
            next_page_selector=kv.get(("thread", "next_page_selector")),
        ),
        post_rules=PostRules(
            id_selector=kv.get(("post", "id_selector")),
            author_selector=req("post", "author_selector"),
            timestamp_selector=req("post", "timestamp_selector"),
            timestamp_formats=formats,
            content_selector=req("post", "content_selector"),
            reply_link_selector=kv.get(("post", "reply_link_selector")),
        ),
    )


def lint_definition(d: SiteDefinition, loaded_ids: set[str] = frozenset()) -> list[Diagnostic]:
    """Validate a definition against the selector grammar and the loaded set."""
    diags: list[Diagnostic] = []
    if not d.site_id:
        diags.append(Diagnostic("error", "empty-site-id"))
    if d.site_id in loaded_ids:
        diags.append(Diagnostic("error", "duplicate-site-id", context=d.site_id))
    if not d.host_patterns:
        diags.append(Diagnostic("error", "empty-host-patterns"))
    selectors = {
        "thread.title_selector": d.thread_rules.title_selector,
        "thread.post_list_selector": d.thread_rules.post_list_selector,
        "thread.next_page_selector": d.thread_rules.next_page_selector,
        "post.id_selector": d.post_rules.id_selector,
        "post.author_selector": d.post_rules.author_selector,
        "post.timestamp_selector": d.post_rules.timestamp_selector,
        "post.content_selector": d.post_rules.content_selector,
        "post.reply_link_selector": d.post_rules.reply_link_selector,
    }
    for name, sel in selectors.items():
        if sel is None:
            continue
        try:
            parse_selector(sel)
        except SelectorError as e:
            diags.append(Diagnostic("error", "bad-selector", selector=sel, context=f"{name}: {e}"))
    return diags


def url_host(url: str) -> str:
    return urlsplit(url).hostname or ""


class DefinitionRegistry:
    """Loaded site definitions, re-scanning the directory so new files are
    picked up without a restart. Concurrent readers are safe; reloads take
    an exclusive lock."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._lock = threading.RLock()
        self._defs: dict[str, SiteDefinition] = {}
        self._mtimes: dict[str, float] = {}
        self.refresh()

    def refresh(self) -> None:
        with self._lock:
            files = sorted(self.directory.glob("*.site")) if self.directory.is_dir() else []
            current = {f.stem: f.stat().st_mtime for f in files}
            if current == self._mtimes:
                return
            defs: dict[str, SiteDefinition] = {}
            patterns_seen: dict[str, str] = {}
            for f in files:
                d = parse_definition(f.read_text(encoding="utf-8"))
                diags = lint_definition(d, set(defs))
                errors = [x for x in diags if x.severity == "error"]
                if errors:
                    raise DefinitionError(f"{f.name}: {'; '.join(map(str, errors))}")
                for pat in d.host_patterns:
                    if pat in patterns_seen:
                        raise AmbiguityError(
                            f"host pattern {pat!r} claimed by both "
                            f"{patterns_seen[pat]!r} and {d.site_id!r}")
                    patterns_seen[pat] = d.site_id
                defs[d.site_id] = d
            self._defs = defs
            self._mtimes = current

    def all(self) -> list[SiteDefinition]:
        self.refresh()
        with self._lock:
            return sorted(self._defs.values(), key=lambda d: d.site_id)

    def get(self, site_id: str) -> Optional[SiteDefinition]:
        self.refresh()
        with self._lock:
            return self._defs.get(site_id)

    def add(self, text: str) -> SiteDefinition:
        """Validate and persist a new definition file, making its hosts
        immediately fetchable."""
        d = parse_definition(text)
        diags = lint_definition(d, {x.site_id for x in self.all()})
        errors = [x for x in diags if x.severity == "error"]
        if errors:
            raise DefinitionError("; ".join(map(str, errors)))
        self.directory.mkdir(parents=True, exist_ok=True)
        (self.directory / f"{d.site_id}.site").write_text(text, encoding="utf-8")
        self.refresh()
        return d

    def match_site(self, url: str) -> Optional[SiteDefinition]:
        host = url_host(url)
        if not host:
            return None
        matches = []
        for d in self.all():
            if any(fnmatch.fnmatch(host, pat) for pat in d.host_patterns):
                matches.append(d)
        if len(matches) > 1:
            raise AmbiguityError(
                f"host {host!r} matched by {[d.site_id for d in matches]}")
        return matches[0] if matches else None
