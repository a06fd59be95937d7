"""Canonical, site-independent forum data model.

Every parser emits the same thread/post/author shapes regardless of the
website it scraped, and every downstream consumer (topics, network,
timeline) reads only these types.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Optional
from xml.etree import ElementTree as ET

ANONYMOUS = "<anonymous>"

#: reply_evidence values
EVIDENCE_STRUCTURAL = "structural"
EVIDENCE_NAME_MENTION = "name-mention"
EVIDENCE_NONE = "none"

_WS_RUN = re.compile(r"\s+")


class ModelError(Exception):
    pass


def normalize_author_name(raw: str) -> str:
    """Collapse whitespace runs and trim; returns ANONYMOUS for empty names."""
    name = _WS_RUN.sub(" ", raw).strip()
    return name if name else ANONYMOUS


def utc(dt: datetime) -> datetime:
    """Coerce a timestamp to UTC; naive datetimes are taken as already UTC."""
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_ts(dt: datetime) -> str:
    return utc(dt).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Post:
    post_id: str
    author: str
    timestamp: datetime
    content: str
    reply_to: Optional[str] = None
    reply_evidence: str = EVIDENCE_NONE

    def with_reply(self, target: str, evidence: str) -> "Post":
        return replace(self, reply_to=target, reply_evidence=evidence)


@dataclass(frozen=True)
class CanonicalThread:
    thread_id: str
    source_url: str
    site_id: str
    title: str
    fetched_at: datetime
    posts: tuple[Post, ...] = ()


@dataclass(frozen=True)
class Author:
    name: str
    post_count: int = 0
    topic_count: int = 0
    thread_count: int = 0


@dataclass(frozen=True)
class CorpusSelection:
    thread_ids: frozenset[str]


def validate_thread(t: CanonicalThread) -> list[str]:
    """Return machine-readable codes for every invariant violation; [] = valid."""
    violations = []
    if not t.title:
        violations.append("empty-title")
    if not t.source_url or "://" not in t.source_url:
        violations.append("bad-source-url")
    seen: set[str] = set()
    prev_ts = None
    for p in t.posts:
        if p.post_id in seen:
            violations.append("duplicate-post-id")
        if p.reply_to is not None:
            if p.reply_to == p.post_id:
                violations.append("self-reply")
            elif p.reply_to not in seen:
                violations.append("dangling-or-forward-reply")
            if p.reply_evidence == EVIDENCE_NONE:
                violations.append("reply-without-evidence")
        elif p.reply_evidence != EVIDENCE_NONE:
            violations.append("evidence-without-reply")
        if not p.author:
            violations.append("empty-author")
        if prev_ts is not None and utc(p.timestamp) < prev_ts:
            violations.append("unordered-posts")
        prev_ts = utc(p.timestamp)
        seen.add(p.post_id)
    return violations


def thread_statistics(t: CanonicalThread) -> tuple[int, int, Optional[tuple[datetime, datetime]]]:
    """(post count, distinct author count, (min, max) timestamp span)."""
    if not t.posts:
        return 0, 0, None
    stamps = [utc(p.timestamp) for p in t.posts]
    return len(t.posts), len({p.author for p in t.posts}), (min(stamps), max(stamps))


# -- canonical interchange serialization --------------------------------------
#
# One thread element carrying id/url/site/title/fetched_at, one post element
# per post with content as text. This exact byte layout is the golden-file
# format for parser conformance; do not reformat.

def _esc_attr(s: str) -> str:
    return (
        s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;").replace("\n", "&#10;").replace("\r", "&#13;")
        .replace("\t", "&#9;")
    )


def _esc_text(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def serialize_thread(t: CanonicalThread) -> bytes:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<thread id="%s" url="%s" site="%s" title="%s" fetched_at="%s">'
        % (_esc_attr(t.thread_id), _esc_attr(t.source_url), _esc_attr(t.site_id),
           _esc_attr(t.title), format_ts(t.fetched_at)),
    ]
    for p in t.posts:
        attrs = 'id="%s" author="%s" timestamp="%s"' % (
            _esc_attr(p.post_id), _esc_attr(p.author), format_ts(p.timestamp))
        if p.reply_to is not None:
            attrs += ' reply_to="%s" reply_evidence="%s"' % (
                _esc_attr(p.reply_to), p.reply_evidence)
        lines.append("  <post %s>%s</post>" % (attrs, _esc_text(p.content)))
    lines.append("</thread>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_thread(data: bytes) -> CanonicalThread:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        raise ModelError(f"malformed thread document: {e}") from e
    if root.tag != "thread":
        raise ModelError("not a thread document")
    posts = []
    for el in root:
        if el.tag != "post":
            raise ModelError(f"unexpected element {el.tag!r}")
        reply_to = el.get("reply_to")
        posts.append(Post(
            post_id=el.get("id", ""),
            author=el.get("author", ""),
            timestamp=parse_ts(el.get("timestamp", "")),
            content=el.text or "",
            reply_to=reply_to,
            reply_evidence=el.get("reply_evidence", EVIDENCE_NONE)
            if reply_to is not None else EVIDENCE_NONE,
        ))
    return CanonicalThread(
        thread_id=root.get("id", ""),
        source_url=root.get("url", ""),
        site_id=root.get("site", ""),
        title=root.get("title", ""),
        fetched_at=parse_ts(root.get("fetched_at", "")),
        posts=tuple(posts),
    )
