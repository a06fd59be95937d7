import pytest

from commentwatcher.timeline import (
    TimelineError,
    compute_timeline,
    deserialize_timeline,
    serialize_timeline,
)

from conftest import make_post, make_thread, ts


def thread_at_hours(hours, thread_id="t1", site_id="sitea", author="A"):
    posts = [make_post(f"p{i + 1}", author, h) for i, h in enumerate(hours)]
    return make_thread(thread_id, posts, site_id=site_id,
                       url=f"fixture://{site_id}.example/{thread_id}.html")


def assign_all(thread, topic=0):
    return {f"{thread.thread_id}/{p.post_id}": frozenset({topic})
            for p in thread.posts}


def test_interval_count_validation():
    t = thread_at_hours([0, 1])
    with pytest.raises(TimelineError):
        compute_timeline([t], assign_all(t), 0)


def test_unknown_grouping_rejected():
    t = thread_at_hours([0, 1])
    with pytest.raises(TimelineError):
        compute_timeline([t], assign_all(t), 2, group_by="author")


def test_no_assigned_posts_rejected():
    t = thread_at_hours([0, 1])
    with pytest.raises(TimelineError):
        compute_timeline([t], {}, 2)


def test_degenerate_span_single_bucket():
    t = thread_at_hours([5, 5, 5])
    series = compute_timeline([t], assign_all(t), 3)
    assert series.groups["t1"][0] == [3, 0, 0]
    start, end = series.intervals[0]
    assert start == end == ts(5)


def test_boundary_post_falls_into_upper_interval():
    # span [0h, 2h), two intervals; the post at exactly 1h opens the second
    t = thread_at_hours([0, 1, 2])
    series = compute_timeline([t], assign_all(t), 2)
    assert series.groups["t1"][0] == [1, 2]
    assert series.intervals == [(ts(0), ts(1)), (ts(1), ts(2))]


def test_last_interval_closed_at_max():
    t = thread_at_hours([0, 4])
    series = compute_timeline([t], assign_all(t), 4)
    assert series.groups["t1"][0] == [1, 0, 0, 1]


def test_conservation():
    t = thread_at_hours([0, 0.5, 1.1, 2.7, 3.3, 4])
    for n in (1, 2, 3, 5, 7):
        series = compute_timeline([t], assign_all(t), n)
        assert sum(series.groups["t1"][0]) == 6


def test_refinement():
    # halving the interval width splits each bucket in two
    t = thread_at_hours([0, 0.3, 1.1, 2.7, 3.3, 4])
    coarse = compute_timeline([t], assign_all(t), 4)
    fine = compute_timeline([t], assign_all(t), 8)
    c, f = coarse.groups["t1"][0], fine.groups["t1"][0]
    assert c == [f[2 * i] + f[2 * i + 1] for i in range(4)]


def test_multi_topic_posts_count_once_per_topic():
    t = thread_at_hours([0, 1])
    assignments = {"t1/p1": frozenset({0, 1}), "t1/p2": frozenset({1})}
    series = compute_timeline([t], assignments, 1)
    assert series.groups["t1"][0] == [1]
    assert series.groups["t1"][1] == [2]


def test_unassigned_posts_do_not_stretch_the_span():
    t = thread_at_hours([0, 1, 100])
    assignments = {"t1/p1": frozenset({0}), "t1/p2": frozenset({0})}
    series = compute_timeline([t], assignments, 2)
    assert series.intervals[-1][1] == ts(1)


def test_group_by_site_merges_threads():
    t1 = thread_at_hours([0, 1], thread_id="t1", site_id="sitea")
    t2 = thread_at_hours([2, 3], thread_id="t2", site_id="sitea")
    assignments = {**assign_all(t1), **assign_all(t2)}
    by_forum = compute_timeline([t1, t2], assignments, 1, group_by="forum")
    by_site = compute_timeline([t1, t2], assignments, 1, group_by="site")
    assert set(by_forum.groups) == {"t1", "t2"}
    assert set(by_site.groups) == {"sitea"}
    assert by_site.groups["sitea"][0] == [4]


def test_shared_axis_across_groups():
    t1 = thread_at_hours([0, 1], thread_id="t1")
    t2 = thread_at_hours([9, 10], thread_id="t2")
    assignments = {**assign_all(t1), **assign_all(t2)}
    series = compute_timeline([t1, t2], assignments, 2)
    # both threads bucketed against the selection-wide span [0h, 10h]
    assert series.groups["t1"][0] == [2, 0]
    assert series.groups["t2"][0] == [0, 2]


def test_serialize_roundtrip():
    t1 = thread_at_hours([0, 1, 3], thread_id="t1")
    t2 = thread_at_hours([2, 4], thread_id="t2")
    assignments = {**assign_all(t1, topic=0), **assign_all(t2, topic=2)}
    series = compute_timeline([t1, t2], assignments, 4)
    back = deserialize_timeline(serialize_timeline(series))
    assert back.groups == series.groups
    assert back.intervals == series.intervals
    assert serialize_timeline(back) == serialize_timeline(series)


def test_serialize_header_and_sorting():
    t = thread_at_hours([0, 1])
    data = serialize_timeline(compute_timeline([t], assign_all(t), 2))
    lines = data.decode().splitlines()
    assert lines[0] == "group\ttopic\tinterval\tstart\tend\tcount"
    assert len(lines) == 3


def test_deserialize_rejects_foreign_document():
    with pytest.raises(TimelineError):
        deserialize_timeline(b"nope\n")
