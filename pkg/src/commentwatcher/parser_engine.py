"""Meta-parser: applies a site definition to a cleaned page.

The engine knows nothing about any particular website; everything
site-specific lives in the SiteDefinition it is handed.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Optional
from xml.etree.ElementTree import Element

from .cleaner import CleanDocument
from .model import (
    ANONYMOUS,
    EVIDENCE_NAME_MENTION,
    EVIDENCE_STRUCTURAL,
    CanonicalThread,
    Post,
    normalize_author_name,
    utc,
)
from .sitedefs import Diagnostic, SiteDefinition
from .selectors import select, select_value

_WS_RUN = re.compile(r"\s+")


def _clean_text(s: Optional[str]) -> str:
    return _WS_RUN.sub(" ", s or "").strip()


def thread_id_for_url(url: str) -> str:
    return hashlib.sha1(url.encode("utf-8")).hexdigest()[:12]


@dataclass
class RawPost:
    """One post as extracted from a page, before ordering and numbering."""
    page_order: int
    native_id: Optional[str]
    author: str
    timestamp: datetime
    content: str
    reply_ref: Optional[str]  # native id referenced by a structural reply link


@dataclass
class PageExtraction:
    title: str
    posts: list[RawPost]
    next_page_url: Optional[str]
    diagnostics: list[Diagnostic]

    @property
    def failed(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


def _parse_timestamp(raw: str, formats: tuple[str, ...]) -> Optional[datetime]:
    for fmt in formats:
        try:
            return utc(datetime.strptime(raw, fmt))
        except ValueError:
            continue
    return None


def extract_page(doc: CleanDocument, d: SiteDefinition) -> PageExtraction:
    diags: list[Diagnostic] = []
    tr, pr = d.thread_rules, d.post_rules

    title = _clean_text(select_value(doc.root, tr.title_selector))
    if not title:
        diags.append(Diagnostic("error", "missing-title", selector=tr.title_selector,
                                context=doc.source_url))

    post_nodes = select(doc.root, tr.post_list_selector)
    if not post_nodes:
        diags.append(Diagnostic("error", "no-posts-matched",
                                selector=tr.post_list_selector, context=doc.source_url))

    posts: list[RawPost] = []
    for order, node in enumerate(post_nodes, 1):
        where = f"{doc.source_url}#post{order}"
        native_id = None
        if pr.id_selector:
            native_id = _clean_text(select_value(node, pr.id_selector)) or None

        author_raw = select_value(node, pr.author_selector)
        if author_raw is None or not _clean_text(author_raw):
            diags.append(Diagnostic("warning", "missing-author",
                                    selector=pr.author_selector, context=where))
            author = ANONYMOUS
        else:
            author = normalize_author_name(author_raw)

        ts_raw = _clean_text(select_value(node, pr.timestamp_selector))
        ts = _parse_timestamp(ts_raw, pr.timestamp_formats) if ts_raw else None
        if ts is None:
            diags.append(Diagnostic("error", "unparseable-timestamp",
                                    selector=pr.timestamp_selector,
                                    context=f"{where}: {ts_raw!r}"))
            continue  # one bad post never discards the thread

        content = _clean_text(select_value(node, pr.content_selector))
        if not content:
            diags.append(Diagnostic("warning", "empty-content",
                                    selector=pr.content_selector, context=where))

        reply_ref = None
        if pr.reply_link_selector:
            ref = select_value(node, pr.reply_link_selector)
            if ref:
                reply_ref = ref.strip().lstrip("#")

        posts.append(RawPost(order, native_id, author, ts, content, reply_ref))

    next_url = None
    if tr.next_page_selector:
        next_url = select_value(doc.root, tr.next_page_selector)
        if next_url is not None:
            next_url = next_url.strip() or None

    return PageExtraction(title, posts, next_url, diags)


def assemble_thread(
    source_url: str,
    d: SiteDefinition,
    fetched_at: datetime,
    title: str,
    raw_posts: list[RawPost],
) -> tuple[CanonicalThread, list[Diagnostic]]:
    """Order, number and reply-resolve extracted posts into a thread."""
    diags: list[Diagnostic] = []
    ordered = sorted(enumerate(raw_posts), key=lambda ip: (utc(ip[1].timestamp), ip[0]))

    native_to_id: dict[str, str] = {}
    posts: list[Post] = []
    for n, (_, rp) in enumerate(ordered, 1):
        post_id = rp.native_id if rp.native_id else f"p{n}"
        reply_to = None
        evidence = "none"
        if rp.reply_ref is not None:
            target = native_to_id.get(rp.reply_ref)
            if target is not None and target != post_id:
                reply_to = target
                evidence = EVIDENCE_STRUCTURAL
            else:
                diags.append(Diagnostic(
                    "warning", "unresolvable-reply-link",
                    context=f"post {post_id} -> {rp.reply_ref!r}"))
        posts.append(Post(post_id, rp.author, utc(rp.timestamp), rp.content,
                          reply_to, evidence if reply_to else "none"))
        if rp.native_id:
            native_to_id[rp.native_id] = post_id
        native_to_id.setdefault(post_id, post_id)

    thread = CanonicalThread(
        thread_id=thread_id_for_url(source_url),
        source_url=source_url,
        site_id=d.site_id,
        title=title,
        fetched_at=utc(fetched_at),
        posts=tuple(posts),
    )
    return thread, diags


def apply_definition(
    doc: CleanDocument, d: SiteDefinition, fetched_at: datetime
) -> tuple[Optional[CanonicalThread], list[Diagnostic]]:
    """Extract one page into a canonical thread; (None, diags) on error."""
    page = extract_page(doc, d)
    if page.failed and (not page.posts or not page.title):
        return None, page.diagnostics
    thread, diags = assemble_thread(doc.source_url, d, fetched_at, page.title, page.posts)
    return thread, page.diagnostics + diags


# -- name-mention reply resolution ---------------------------------------------

def _mention_target(content: str, candidates: dict[str, str]) -> Optional[str]:
    """Match '@Name ...' or 'Name: ...' prefixes against known author keys;
    longest author name wins. Returns the post_id to link to."""
    best_name = None
    for name in candidates:
        if name == ANONYMOUS:
            continue
        matched = False
        if content.startswith("@" + name):
            rest = content[len(name) + 1:]
            matched = not rest or not (rest[0].isalnum())
        if not matched and content.startswith(name + ":"):
            matched = True
        if matched and (best_name is None or len(name) > len(best_name)):
            best_name = name
    return candidates[best_name] if best_name else None


def resolve_name_mentions(t: CanonicalThread) -> CanonicalThread:
    """Link posts that open with '@Author' or 'Author:' to that author's
    most recent earlier post. Structural replies are left untouched."""
    latest_by_author: dict[str, str] = {}
    posts: list[Post] = []
    for p in t.posts:
        if p.reply_to is None:
            target = _mention_target(p.content, latest_by_author)
            if target is not None and target != p.post_id:
                p = p.with_reply(target, EVIDENCE_NAME_MENTION)
        posts.append(p)
        latest_by_author[p.author] = p.post_id
    return CanonicalThread(t.thread_id, t.source_url, t.site_id, t.title,
                           t.fetched_at, tuple(posts))
