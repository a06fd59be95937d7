"""Restricted path-selector engine used by site definitions.

Supported syntax, small enough to lint and expressive enough for forum
layouts:

    div/span                child descent
    //div                   descendant search from the context node
    .//span                 explicit relative descendant search
    div[@class='post']      attribute equality predicate
    li[2]                   1-based positional index (per parent)
    a/@href                 trailing attribute extraction step
    *                       any element name
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional
from xml.etree.ElementTree import Element


class SelectorError(ValueError):
    pass


_NAME = r"[A-Za-z_][A-Za-z0-9_.:-]*"
_STEP_RE = re.compile(
    r"^(?P<name>\*|%(n)s)(?P<preds>(?:\[[^\]]*\])*)$" % {"n": _NAME})
_ATTR_PRED_RE = re.compile(r"^@(%s)=(?:'([^']*)'|\"([^\"]*)\")$" % _NAME)
_INDEX_PRED_RE = re.compile(r"^[0-9]+$")
_ATTR_STEP_RE = re.compile(r"^@(%s)$" % _NAME)


@dataclass(frozen=True)
class Step:
    name: str
    descendant: bool
    attr_preds: tuple[tuple[str, str], ...] = ()
    index: Optional[int] = None


@dataclass(frozen=True)
class Selector:
    steps: tuple[Step, ...]
    attr: Optional[str]  # trailing @attr extraction, if any
    source: str


def parse_selector(text: str) -> Selector:
    src = text.strip()
    if not src:
        raise SelectorError("empty selector")
    rest = src
    if rest.startswith("./"):
        rest = rest[1:]  # './/' and './' mean relative, same as bare
    # Split into (descendant?, step) pairs.
    steps: list[tuple[bool, str]] = []
    i = 0
    first = True
    while i < len(rest):
        descendant = False
        if rest.startswith("//", i):
            descendant = True
            i += 2
        elif rest.startswith("/", i):
            if first:
                # leading single '/' anchors at the context node itself
                descendant = False
            i += 1
        elif not first:
            raise SelectorError(f"expected '/' in selector {src!r}")
        j = i
        depth = 0
        while j < len(rest):
            c = rest[j]
            if c == "[":
                depth += 1
            elif c == "]":
                depth -= 1
                if depth < 0:
                    raise SelectorError(f"unbalanced ']' in selector {src!r}")
            elif c == "/" and depth == 0:
                break
            j += 1
        if depth != 0:
            raise SelectorError(f"unbalanced '[' in selector {src!r}")
        raw = rest[i:j]
        if not raw:
            raise SelectorError(f"empty step in selector {src!r}")
        steps.append((descendant, raw))
        i = j
        first = False

    attr: Optional[str] = None
    parsed: list[Step] = []
    for pos, (descendant, raw) in enumerate(steps):
        m = _ATTR_STEP_RE.match(raw)
        if m:
            if pos != len(steps) - 1:
                raise SelectorError(
                    f"attribute step must be last in selector {src!r}")
            if descendant:
                raise SelectorError(
                    f"attribute step cannot use '//' in selector {src!r}")
            attr = m.group(1)
            continue
        m = _STEP_RE.match(raw)
        if not m:
            raise SelectorError(f"bad step {raw!r} in selector {src!r}")
        attr_preds: list[tuple[str, str]] = []
        index: Optional[int] = None
        preds = m.group("preds")
        for pred in re.findall(r"\[([^\]]*)\]", preds):
            pm = _ATTR_PRED_RE.match(pred)
            if pm:
                attr_preds.append((pm.group(1), pm.group(2) if pm.group(2) is not None else pm.group(3)))
                continue
            if _INDEX_PRED_RE.match(pred):
                if index is not None:
                    raise SelectorError(
                        f"duplicate positional predicate in {src!r}")
                index = int(pred)
                if index < 1:
                    raise SelectorError(f"positional index must be >= 1 in {src!r}")
                continue
            raise SelectorError(f"bad predicate [{pred}] in selector {src!r}")
        parsed.append(Step(m.group("name"), descendant, tuple(attr_preds), index))
    if not parsed and attr is None:
        raise SelectorError(f"no steps in selector {src!r}")
    return Selector(tuple(parsed), attr, src)


def _descendants(el: Element):
    for child in el:
        yield child
        yield from _descendants(child)


def _matches(el: Element, step: Step) -> bool:
    if step.name != "*" and el.tag != step.name:
        return False
    for attr, value in step.attr_preds:
        if el.get(attr) != value:
            return False
    return True


def _apply_step(nodes: list[Element], step: Step, anchor_self: bool) -> list[Element]:
    out: list[Element] = []
    seen: set[int] = set()
    for node in nodes:
        if step.descendant:
            pool = list(_descendants(node))
        elif anchor_self:
            pool = [node]
        else:
            pool = list(node)
        matched = [el for el in pool if _matches(el, step)]
        if step.index is not None:
            matched = matched[step.index - 1:step.index]
        for el in matched:
            if id(el) not in seen:
                seen.add(id(el))
                out.append(el)
    return out


def select(context: Element, selector: Selector | str) -> list[Element]:
    """All elements matched by the selector, in document order."""
    sel = parse_selector(selector) if isinstance(selector, str) else selector
    nodes = [context]
    anchor = sel.source.startswith("/") and not sel.source.startswith("//")
    for i, step in enumerate(sel.steps):
        nodes = _apply_step(nodes, step, anchor_self=(anchor and i == 0))
    return nodes


def text_content(el: Element) -> str:
    return "".join(el.itertext())


def select_value(context: Element, selector: Selector | str) -> Optional[str]:
    """Text content of the first match, or the attribute value for @attr
    selectors; None when nothing matches."""
    sel = parse_selector(selector) if isinstance(selector, str) else selector
    if sel.attr is not None and not sel.steps:
        return context.get(sel.attr)
    nodes = select(context, sel)
    if not nodes:
        return None
    if sel.attr is not None:
        for node in nodes:
            value = node.get(sel.attr)
            if value is not None:
                return value
        return None
    return text_content(nodes[0])
