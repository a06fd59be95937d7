"""Benchmark the two hot kernels: compiled (numba) vs pure interpreter path.

Run with: python3 benchmarks/bench_kernels.py

Both variants live side by side in the library (the plain function and its
maybe_njit-wrapped twin), so one process can time them against each other.
With COMMENTWATCHER_NO_NUMBA=1 the "compiled" column is the fallback itself
and the speedup reads 1x.
"""
import random
import time

import numpy as np

from commentwatcher._accel import numba_enabled
from commentwatcher.network import _betweenness_passes, _betweenness_compiled
from commentwatcher.topics.tng import _gibbs_sweeps, _gibbs_sweeps_compiled


def bench(label, pure, compiled, args, repeat=3):
    compiled(*args)  # warm up: triggers jit compilation
    t0 = time.perf_counter()
    for _ in range(repeat):
        compiled(*args)
    fast = (time.perf_counter() - t0) / repeat
    t0 = time.perf_counter()
    pure(*args)
    slow = time.perf_counter() - t0
    print(f"{label:<22} pure {slow * 1000:9.1f} ms   "
          f"compiled {fast * 1000:9.1f} ms   speedup {slow / fast:6.1f}x")


def gibbs_args(n_docs=150, doc_len=40, n_vocab=60, k=4, iterations=60):
    rng = random.Random(5)
    tokens, doc_of, is_first = [], [], []
    for d in range(n_docs):
        for j in range(doc_len):
            tokens.append(rng.randrange(n_vocab))
            doc_of.append(d)
            is_first.append(1 if j == 0 else 0)
    tokens = np.array(tokens, dtype=np.int64)
    doc_of = np.array(doc_of, dtype=np.int64)
    is_first = np.array(is_first, dtype=np.int64)
    pair_index = {}
    pair_id = np.full(len(tokens), -1, dtype=np.int64)
    for i in range(len(tokens)):
        if is_first[i]:
            continue
        pair = (int(tokens[i - 1]), int(tokens[i]))
        pair_id[i] = pair_index.setdefault(pair, len(pair_index))
    n_pairs = max(len(pair_index), 1)
    pair_prev = np.zeros(n_pairs, dtype=np.int64)
    for (prev, _), pid in pair_index.items():
        pair_prev[pid] = prev
    return (tokens, doc_of, is_first, pair_id, n_docs, k, n_vocab, n_pairs,
            pair_prev, 0.5, 0.01, 0.1, iterations, iterations // 4, 1)


def graph_args(n=400, m=2400):
    rng = random.Random(9)
    edges = sorted({(rng.randrange(n), rng.randrange(n)) for _ in range(m)})
    edges = [(u, v) for u, v in edges if u != v]
    indptr = np.zeros(n + 1, dtype=np.int64)
    for u, _ in edges:
        indptr[u + 1] += 1
    indptr = np.cumsum(indptr)
    indices = np.array([v for _, v in edges], dtype=np.int64)
    redges = sorted((v, u) for u, v in edges)
    rindptr = np.zeros(n + 1, dtype=np.int64)
    for v, _ in redges:
        rindptr[v + 1] += 1
    rindptr = np.cumsum(rindptr)
    rindices = np.array([u for _, u in redges], dtype=np.int64)
    return indptr, indices, rindptr, rindices, n


def main():
    print(f"numba enabled: {numba_enabled()}")
    bench("gibbs sweeps", _gibbs_sweeps, _gibbs_sweeps_compiled, gibbs_args())
    bench("betweenness passes", _betweenness_passes, _betweenness_compiled,
          graph_args())


if __name__ == "__main__":
    main()
