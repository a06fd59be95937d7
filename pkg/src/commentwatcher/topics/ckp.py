"""Overlapping document clustering: clusters as topics.

Documents are unit tf-idf vectors. After k-means++-style seeding, each
document joins every cluster whose centroid similarity is within a factor
overlap_threshold of its best similarity (threshold 1 recovers disjoint
clustering). Cluster expressions are the frequent n-grams (n <= 3) of the
member documents, scored by closeness of the expression's embedding to
the cluster centroid: score = 1 - d, with d = (1 - cos)/2 in [0, 1].
"""
from __future__ import annotations

import numpy as np

from .corpus import TokenizedCorpus
from .result import Expression, Topic, TopicResult, sort_expressions
from .tng import ParameterError, _lcg_uniform


def tfidf_matrix(corpus: TokenizedCorpus) -> np.ndarray:
    """Dense unit-normalized tf-idf matrix, one row per document."""
    n_docs = len(corpus.documents)
    n_vocab = len(corpus.vocabulary)
    counts = np.zeros((n_docs, n_vocab), dtype=np.float64)
    for d, (_, tokens) in enumerate(corpus.documents):
        for tok in tokens:
            counts[d, corpus.vocabulary[tok]] += 1.0
    df = (counts > 0).sum(axis=0)
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
    x = counts * idf
    norms = np.linalg.norm(x, axis=1)
    norms[norms == 0] = 1.0
    return x / norms[:, None]


def _seed_centroids(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    """k-means++-style seeding on cosine distance, deterministic per seed."""
    state = np.empty(1, dtype=np.int64)
    state[0] = (seed % 2147483646) + 1
    n = x.shape[0]
    chosen = [int(_lcg_uniform(state) * n) % n]
    for _ in range(1, k):
        sims = x @ x[chosen].T
        dist = 1.0 - sims.max(axis=1)
        dist[chosen] = 0.0
        total = dist.sum()
        if total <= 0:
            # all documents coincide with a centroid; pick the first unchosen
            for i in range(n):
                if i not in chosen:
                    chosen.append(i)
                    break
            continue
        u = _lcg_uniform(state) * total
        acc = 0.0
        pick = n - 1
        for i in range(n):
            acc += dist[i]
            if u < acc:
                pick = i
                break
        chosen.append(pick)
    return x[chosen].copy()


def _normalize_rows(c: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(c, axis=1)
    norms[norms == 0] = 1.0
    return c / norms[:, None]


_SIM_TOL = 1e-12


def cluster_documents(
    x: np.ndarray, k: int, overlap_threshold: float, max_iters: int, seed: int,
) -> tuple[list[set[int]], np.ndarray]:
    """Returns (memberships per document, unit-norm centroids)."""
    centroids = _seed_centroids(x, k, seed)
    memberships: list[set[int]] = [set() for _ in range(x.shape[0])]
    for _ in range(max_iters):
        sims = x @ centroids.T
        new_memberships = []
        for d in range(x.shape[0]):
            best = sims[d].max()
            members = {c for c in range(k)
                       if sims[d, c] >= overlap_threshold * best - _SIM_TOL}
            new_memberships.append(members)
        for c in range(k):
            docs = [d for d in range(x.shape[0]) if c in new_memberships[d]]
            if not docs:
                # re-seed an emptied cluster with the farthest document
                farthest = int(np.argmin(sims.max(axis=1)))
                new_memberships[farthest].add(c)
                docs = [farthest]
            centroids[c] = x[docs].mean(axis=0)
        centroids = _normalize_rows(centroids)
        if new_memberships == memberships:
            break
        memberships = new_memberships
    return memberships, centroids


def _cluster_ngrams(docs_tokens: list[list[str]], min_support: int) -> dict[str, list[int]]:
    """n-grams (n <= 3) mapped to the member-doc indexes containing them,
    kept when the within-cluster document frequency reaches min_support."""
    containing: dict[str, set[int]] = {}
    for idx, tokens in enumerate(docs_tokens):
        grams = set()
        for n in (1, 2, 3):
            for j in range(len(tokens) - n + 1):
                grams.add(" ".join(tokens[j:j + n]))
        for g in grams:
            containing.setdefault(g, set()).add(idx)
    return {g: sorted(ds) for g, ds in containing.items() if len(ds) >= min_support}


def extract_ckp(
    corpus: TokenizedCorpus,
    k: int,
    overlap_threshold: float = 0.8,
    min_support: int = 1,
    max_iters: int = 50,
    top_k: int = 10,
    seed: int = 1,
) -> TopicResult:
    if k < 2:
        raise ParameterError("k must be >= 2")
    if k > len(corpus.documents):
        raise ParameterError("k exceeds the number of non-empty documents")
    if not (0.0 < overlap_threshold <= 1.0):
        raise ParameterError("overlap_threshold must be in (0, 1]")

    x = tfidf_matrix(corpus)
    memberships, centroids = cluster_documents(x, k, overlap_threshold, max_iters, seed)

    topics: list[Topic] = []
    internal: dict[int, np.ndarray] = {}
    for c in range(k):
        member_docs = [d for d in range(x.shape[0]) if c in memberships[d]]
        docs_tokens = [corpus.documents[d][1] for d in member_docs]
        grams = _cluster_ngrams(docs_tokens, min_support)
        expressions = []
        for text, local_idxs in grams.items():
            rows = x[[member_docs[i] for i in local_idxs]]
            emb = rows.mean(axis=0)
            norm = np.linalg.norm(emb)
            if norm == 0:
                continue
            cos = float((emb / norm) @ centroids[c])
            cos = max(-1.0, min(1.0, cos))
            score = 1.0 - (1.0 - cos) / 2.0
            expressions.append(Expression(text, score))
        topics.append(Topic(c, sort_expressions(expressions)[:top_k]))
        internal[c] = centroids[c]

    assignments = {corpus.documents[d][0]: frozenset(memberships[d])
                   for d in range(x.shape[0])}
    params = {"k": k, "overlap_threshold": overlap_threshold,
              "min_support": min_support, "max_iters": max_iters, "top_k": top_k}
    return TopicResult("ckp", params, seed, topics, assignments, internal)
