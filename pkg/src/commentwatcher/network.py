"""Topic-labeled reply multidigraph over authors, with graph measures.

Arc direction is replier -> replied-to. Parallel arcs between the same
pair differ only in topic label; weights count replies. Betweenness and
harmonic closeness are computed on the collapsed unweighted simple
digraph, with the per-source passes written as flat-array kernels (see
_accel for the numba switch).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from ._accel import maybe_njit
from .model import Author, CanonicalThread

UNASSIGNED_TOPIC = -1


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    topic_id: int
    weight: int


@dataclass(frozen=True)
class NodeRecord:
    author: Author
    weighted_in_degree: int = 0
    weighted_out_degree: int = 0
    betweenness: float = 0.0
    closeness: float = 0.0


@dataclass
class SocialNetwork:
    nodes: dict[str, NodeRecord]
    arcs: list[Arc]
    warnings: list[str] = field(default_factory=list)

    @property
    def topic_ids(self) -> set[int]:
        return {a.topic_id for a in self.arcs}


def _betweenness_passes(indptr, indices, rindptr, rindices, n):
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for idx in range(tail - 1, 0, -1):
            w = order[idx]
            coeff = (1.0 + delta[w]) / sigma[w]
            for e in range(rindptr[w], rindptr[w + 1]):
                v = rindices[e]
                if dist[v] >= 0 and dist[v] + 1 == dist[w]:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def _closeness_passes(indptr, indices, n):
    cc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        total = 0.0
        while head < tail:
            v = queue[head]
            head += 1
            if v != s:
                total += 1.0 / dist[v]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[tail] = w
                    tail += 1
        cc[s] = total
    return cc


_betweenness_compiled = maybe_njit(_betweenness_passes)
_closeness_compiled = maybe_njit(_closeness_passes)


def _collapsed_csr(names: list[str], arcs: Iterable[Arc]):
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    edges = sorted({(index[a.src], index[a.dst]) for a in arcs if a.src != a.dst})
    indptr = np.zeros(n + 1, dtype=np.int64)
    for u, _ in edges:
        indptr[u + 1] += 1
    indptr = np.cumsum(indptr)
    indices = (np.array([v for _, v in edges], dtype=np.int64)
               if edges else np.empty(0, dtype=np.int64))
    redges = sorted((v, u) for u, v in edges)
    rindptr = np.zeros(n + 1, dtype=np.int64)
    for v, _ in redges:
        rindptr[v + 1] += 1
    rindptr = np.cumsum(rindptr)
    rindices = (np.array([u for _, u in redges], dtype=np.int64)
                if redges else np.empty(0, dtype=np.int64))
    return indptr, indices, rindptr, rindices


def betweenness(n: SocialNetwork) -> dict[str, float]:
    """Directed unweighted betweenness over the collapsed simple digraph,
    unnormalized."""
    names = sorted(n.nodes)
    if not names:
        return {}
    indptr, indices, rindptr, rindices = _collapsed_csr(names, n.arcs)
    bc = _betweenness_compiled(indptr, indices, rindptr, rindices, len(names))
    return {name: float(bc[i]) for i, name in enumerate(names)}


def closeness(n: SocialNetwork) -> dict[str, float]:
    """Harmonic closeness over outgoing distances on the collapsed digraph."""
    names = sorted(n.nodes)
    if not names:
        return {}
    indptr, indices, _, _ = _collapsed_csr(names, n.arcs)
    cc = _closeness_compiled(indptr, indices, len(names))
    return {name: float(cc[i]) for i, name in enumerate(names)}


def weighted_degrees(n: SocialNetwork) -> dict[str, tuple[int, int]]:
    degrees = {name: [0, 0] for name in n.nodes}
    for a in n.arcs:
        degrees[a.src][1] += a.weight
        degrees[a.dst][0] += a.weight
    return {name: (d[0], d[1]) for name, d in degrees.items()}


def _with_metrics(nodes: dict[str, Author], arcs: list[Arc],
                  warnings: list[str]) -> SocialNetwork:
    net = SocialNetwork({name: NodeRecord(author) for name, author in nodes.items()},
                        arcs, warnings)
    degrees = weighted_degrees(net)
    bc = betweenness(net)
    cc = closeness(net)
    net.nodes = {
        name: NodeRecord(author, degrees[name][0], degrees[name][1],
                         bc[name], cc[name])
        for name, author in nodes.items()
    }
    return net


def build_network(
    threads: Iterable[CanonicalThread],
    assignments: dict[str, frozenset[int]],
) -> SocialNetwork:
    """Assignments are keyed by "<thread_id>/<post_id>" as produced by the
    topics module. A replying post with no assignment contributes an arc
    labeled UNASSIGNED_TOPIC and a warning."""
    warnings: list[str] = []
    post_counts: dict[str, int] = {}
    thread_sets: dict[str, set[str]] = {}
    topic_sets: dict[str, set[int]] = {}
    weights: dict[tuple[str, str, int], int] = {}

    for t in threads:
        author_of = {p.post_id: p.author for p in t.posts}
        for p in t.posts:
            key = f"{t.thread_id}/{p.post_id}"
            post_counts[p.author] = post_counts.get(p.author, 0) + 1
            thread_sets.setdefault(p.author, set()).add(t.thread_id)
            topic_sets.setdefault(p.author, set()).update(assignments.get(key, ()))
            if p.reply_to is None:
                continue
            dst_author = author_of[p.reply_to]
            topics = assignments.get(key)
            if not topics:
                warnings.append(f"no topic assignment for replying post {key}")
                topics = frozenset({UNASSIGNED_TOPIC})
            for topic in topics:
                arc_key = (p.author, dst_author, topic)
                weights[arc_key] = weights.get(arc_key, 0) + 1

    nodes = {
        name: Author(name, post_counts[name], len(topic_sets.get(name, ())),
                     len(thread_sets[name]))
        for name in post_counts
    }
    arcs = [Arc(src, dst, topic, w)
            for (src, dst, topic), w in sorted(weights.items())]
    return _with_metrics(nodes, arcs, warnings)


def filter_by_topics(n: SocialNetwork, topics: set[int],
                     keep_isolated: bool = False) -> SocialNetwork:
    arcs = [a for a in n.arcs if a.topic_id in topics]
    if keep_isolated:
        kept = set(n.nodes)
    else:
        kept = {a.src for a in arcs} | {a.dst for a in arcs}
    nodes = {name: n.nodes[name].author for name in kept}
    return _with_metrics(nodes, arcs, list(n.warnings))


# -- graph-exchange text format -------------------------------------------------

_HEADER = "commentwatcher-network 1"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unesc(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        if s[i] == "\\" and i + 1 < len(s):
            out.append({"\\": "\\", "t": "\t", "n": "\n"}[s[i + 1]])
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def export_network(n: SocialNetwork, fmt: str = "text") -> bytes:
    """Tab-separated node/arc records under a versioned header. Node lines:
    name, post/topic/thread counts, weighted in/out degree, betweenness,
    closeness. Arc lines: src, dst, topic_id, weight."""
    if fmt != "text":
        raise ValueError(f"unknown export format {fmt!r}")
    lines = [_HEADER]
    for name in sorted(n.nodes):
        rec = n.nodes[name]
        a = rec.author
        lines.append("node\t%s\t%d\t%d\t%d\t%d\t%d\t%s\t%s" % (
            _esc(name), a.post_count, a.topic_count, a.thread_count,
            rec.weighted_in_degree, rec.weighted_out_degree,
            repr(rec.betweenness), repr(rec.closeness)))
    for a in sorted(n.arcs, key=lambda x: (x.src, x.dst, x.topic_id)):
        lines.append("arc\t%s\t%s\t%d\t%d" % (_esc(a.src), _esc(a.dst),
                                              a.topic_id, a.weight))
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_network(data: bytes) -> SocialNetwork:
    lines = data.decode("utf-8").splitlines()
    if not lines or lines[0] != _HEADER:
        raise ValueError("not a network export document")
    nodes: dict[str, NodeRecord] = {}
    arcs: list[Arc] = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split("\t")
        if parts[0] == "node":
            name = _unesc(parts[1])
            nodes[name] = NodeRecord(
                Author(name, int(parts[2]), int(parts[3]), int(parts[4])),
                int(parts[5]), int(parts[6]), float(parts[7]), float(parts[8]))
        elif parts[0] == "arc":
            arcs.append(Arc(_unesc(parts[1]), _unesc(parts[2]),
                            int(parts[3]), int(parts[4])))
        else:
            raise ValueError(f"unknown record {parts[0]!r}")
    return SocialNetwork(nodes, arcs)
