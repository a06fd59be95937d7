"""Temporal topic popularity: per-topic post counts over equal intervals.

Intervals are half-open [start, end) with the last one closed at the
selection's max timestamp; the span is selection-wide so all groups share
the same axis. Posts without a topic assignment carry no topic and are
excluded from both the counts and the span.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable

from .model import CanonicalThread, format_ts, parse_ts, utc

GROUP_BY_FORUM = "forum"
GROUP_BY_SITE = "site"


class TimelineError(ValueError):
    pass


@dataclass
class TimelineSeries:
    group_by: str
    intervals: list[tuple[datetime, datetime]]
    groups: dict[str, dict[int, list[int]]]  # group key -> topic -> counts[N]

    @property
    def n(self) -> int:
        return len(self.intervals)


def compute_timeline(
    threads: Iterable[CanonicalThread],
    assignments: dict[str, frozenset[int]],
    n: int,
    group_by: str = GROUP_BY_FORUM,
) -> TimelineSeries:
    if n < 1:
        raise TimelineError("interval count must be >= 1")
    if group_by not in (GROUP_BY_FORUM, GROUP_BY_SITE):
        raise TimelineError(f"unknown group_by {group_by!r}")

    assigned: list[tuple[str, float, frozenset[int]]] = []  # (group, epoch, topics)
    for t in threads:
        group = t.thread_id if group_by == GROUP_BY_FORUM else t.site_id
        for p in t.posts:
            topics = assignments.get(f"{t.thread_id}/{p.post_id}")
            if topics:
                assigned.append((group, utc(p.timestamp).timestamp(), topics))
    if not assigned:
        raise TimelineError("no assigned posts in selection")

    t_min = min(e for _, e, _ in assigned)
    t_max = max(e for _, e, _ in assigned)
    width = (t_max - t_min) / n

    def bucket(epoch: float) -> int:
        if width == 0:
            return 0
        i = int((epoch - t_min) / width)
        return min(i, n - 1)  # closes the last interval at t_max

    groups: dict[str, dict[int, list[int]]] = {}
    for group, epoch, topics in assigned:
        per_topic = groups.setdefault(group, {})
        for topic in topics:
            per_topic.setdefault(topic, [0] * n)[bucket(epoch)] += 1

    def ts(epoch: float) -> datetime:
        return datetime.fromtimestamp(epoch, tz=timezone.utc)

    intervals = [(ts(t_min + i * width), ts(t_min + (i + 1) * width))
                 for i in range(n)]
    return TimelineSeries(group_by, intervals, groups)


def serialize_timeline(s: TimelineSeries) -> bytes:
    """Tabular text: header line then one row per (group, topic, interval)."""
    lines = ["group\ttopic\tinterval\tstart\tend\tcount"]
    for group in sorted(s.groups):
        for topic in sorted(s.groups[group]):
            counts = s.groups[group][topic]
            for i, count in enumerate(counts):
                start, end = s.intervals[i]
                lines.append("%s\t%d\t%d\t%s\t%s\t%d" % (
                    group, topic, i, format_ts(start), format_ts(end), count))
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_timeline(data: bytes, group_by: str = GROUP_BY_FORUM) -> TimelineSeries:
    lines = data.decode("utf-8").splitlines()
    if not lines or lines[0] != "group\ttopic\tinterval\tstart\tend\tcount":
        raise TimelineError("not a timeline document")
    intervals: dict[int, tuple[datetime, datetime]] = {}
    groups: dict[str, dict[int, list[int]]] = {}
    rows = []
    for line in lines[1:]:
        group, topic, idx, start, end, count = line.split("\t")
        rows.append((group, int(topic), int(idx), start, end, int(count)))
        intervals[int(idx)] = (parse_ts(start), parse_ts(end))
    n = max(intervals) + 1 if intervals else 0
    for group, topic, idx, _, _, count in rows:
        groups.setdefault(group, {}).setdefault(topic, [0] * n)[idx] = count
    return TimelineSeries(group_by, [intervals[i] for i in range(n)], groups)
