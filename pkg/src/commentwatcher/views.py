"""Derived-view documents shared by the HTTP API and the CLI.

Both surfaces must emit byte-identical documents for the same store state
and query, so all formatting lives here.
"""
from __future__ import annotations

from typing import Optional

from .network import build_network, export_network, filter_by_topics
from .store import ExtractionRecord, Store
from .timeline import compute_timeline, serialize_timeline
from .topics import deserialize_result


def topics_document(record: ExtractionRecord) -> bytes:
    assert record.result is not None
    return record.result


def network_document(
    store: Store,
    record: ExtractionRecord,
    topics: Optional[set[int]] = None,
    keep_isolated: bool = False,
) -> bytes:
    result = deserialize_result(record.result)
    threads = [store.get_thread(tid) for tid in record.thread_ids]
    net = build_network(threads, result.assignments)
    if topics is not None:
        net = filter_by_topics(net, topics, keep_isolated=keep_isolated)
    return export_network(net)


def timeline_document(
    store: Store,
    record: ExtractionRecord,
    intervals: int,
    group_by: str,
) -> bytes:
    result = deserialize_result(record.result)
    threads = [store.get_thread(tid) for tid in record.thread_ids]
    series = compute_timeline(threads, result.assignments, intervals, group_by)
    return serialize_timeline(series)
