"""Unified, algorithm-independent topic extraction result document.

Both extractors emit the same element tree: extraction / topic /
expression / assignments, with deterministic ordering so repeated runs
serialize byte-identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional
from xml.etree import ElementTree as ET


@dataclass(frozen=True)
class Expression:
    text: str
    score: float

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty expression text")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0,1]")


@dataclass(frozen=True)
class Topic:
    topic_id: int
    expressions: tuple[Expression, ...]
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", f"topic #{self.topic_id}")


@dataclass
class TopicResult:
    algorithm: str  # "tng" | "ckp"
    params: dict[str, Any]
    seed: int
    topics: list[Topic]
    assignments: dict[str, frozenset[int]]  # doc key -> topic ids
    internal: dict[int, Any] = field(default_factory=dict)  # per-topic model state


def sort_expressions(expressions) -> tuple[Expression, ...]:
    return tuple(sorted(expressions, key=lambda e: (-e.score, e.text)))


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def serialize_result(r: TopicResult) -> bytes:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<extraction algorithm="%s" seed="%d">' % (_esc(r.algorithm), r.seed),
    ]
    for name in sorted(r.params):
        lines.append('  <param name="%s" value="%s"/>' % (_esc(name), _esc(str(r.params[name]))))
    for topic in sorted(r.topics, key=lambda t: t.topic_id):
        lines.append('  <topic id="%d" label="%s">' % (topic.topic_id, _esc(topic.label)))
        for e in sort_expressions(topic.expressions):
            lines.append('    <expression score="%s">%s</expression>'
                         % (repr(float(e.score)), _esc(e.text)))
        lines.append('  </topic>')
    lines.append('  <assignments>')
    for key in sorted(r.assignments):
        ids = ",".join(str(i) for i in sorted(r.assignments[key]))
        lines.append('    <post id="%s" topics="%s"/>' % (_esc(key), ids))
    lines.append('  </assignments>')
    lines.append('</extraction>')
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_result(data: bytes) -> TopicResult:
    root = ET.fromstring(data)
    if root.tag != "extraction":
        raise ValueError("not an extraction document")
    params: dict[str, Any] = {}
    topics: list[Topic] = []
    assignments: dict[str, frozenset[int]] = {}
    for el in root:
        if el.tag == "param":
            params[el.get("name")] = el.get("value")
        elif el.tag == "topic":
            expressions = tuple(
                Expression(x.text or "", float(x.get("score")))
                for x in el if x.tag == "expression")
            topics.append(Topic(int(el.get("id")), expressions, el.get("label", "")))
        elif el.tag == "assignments":
            for post in el:
                raw = post.get("topics", "")
                ids = frozenset(int(x) for x in raw.split(",") if x != "")
                assignments[post.get("id")] = ids
    return TopicResult(
        algorithm=root.get("algorithm"),
        params=params,
        seed=int(root.get("seed")),
        topics=topics,
        assignments=assignments,
    )
