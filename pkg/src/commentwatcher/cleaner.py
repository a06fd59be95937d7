"""Tag-soup repair: raw fetched HTML bytes to a well-formed element tree.

Repair policy (pinned by golden files): unclosed elements are closed at
their parent's boundary, stray end tags are dropped, text is never
reordered. Same input bytes always produce the identical tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from html.parser import HTMLParser
from typing import Optional
from xml.etree.ElementTree import Element, SubElement


class CleanError(Exception):
    pass


class EncodingError(CleanError):
    pass


class EmptyInputError(CleanError):
    pass


@dataclass(frozen=True)
class RawPage:
    url: str
    body: bytes
    fetched_at: datetime
    declared_encoding: Optional[str] = None


@dataclass(frozen=True)
class CleanDocument:
    root: Element
    source_url: str


VOID_ELEMENTS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# opening a key tag implies closing any still-open tags from its value set
_IMPLIED_CLOSES = {
    "p": {"p"},
    "li": {"p", "li"},
    "dt": {"p", "dt", "dd"},
    "dd": {"p", "dt", "dd"},
    "td": {"p", "td", "th"},
    "th": {"p", "td", "th"},
    "tr": {"p", "td", "th", "tr"},
    "option": {"option"},
}

_META_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?([A-Za-z0-9_.:-]+)""", re.IGNORECASE)


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = Element("root")
        self.stack = [self.root]

    def _top(self) -> Element:
        return self.stack[-1]

    def handle_starttag(self, tag, attrs):
        closes = _IMPLIED_CLOSES.get(tag)
        if closes:
            while len(self.stack) > 1 and self._top().tag in closes:
                self.stack.pop()
        attrib = {}
        for name, value in attrs:
            if name not in attrib:
                attrib[name] = value if value is not None else ""
        el = SubElement(self._top(), tag, attrib)
        if tag not in VOID_ELEMENTS:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        attrib = {}
        for name, value in attrs:
            if name not in attrib:
                attrib[name] = value if value is not None else ""
        SubElement(self._top(), tag, attrib)

    def handle_endtag(self, tag):
        if tag in VOID_ELEMENTS:
            return
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return
        # stray end tag: drop

    def handle_data(self, data):
        top = self._top()
        if len(top):
            last = top[-1]
            last.tail = (last.tail or "") + data
        else:
            top.text = (top.text or "") + data


def decode_page(page: RawPage) -> str:
    candidates = []
    if page.declared_encoding:
        candidates.append(page.declared_encoding)
    m = _META_CHARSET_RE.search(page.body[:4096])
    if m:
        candidates.append(m.group(1).decode("ascii"))
    candidates.append("utf-8")
    for enc in candidates:
        try:
            return page.body.decode(enc)
        except (LookupError, UnicodeDecodeError):
            continue
    raise EncodingError(f"undecodable page body for {page.url}")


def clean_html(page: RawPage) -> CleanDocument:
    if not page.body:
        raise EmptyInputError(f"empty body for {page.url}")
    text = decode_page(page)
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    return CleanDocument(root=builder.root, source_url=page.url)
