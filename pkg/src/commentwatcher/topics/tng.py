"""Topic extraction over n-grams via collapsed Gibbs sampling.

Each token carries a topic indicator plus a binary status flag saying
whether it continues an n-gram with the previous token. Unigram emissions
and formed bigrams are counted separately per topic; after burn-in the
accumulated counts yield one probability table per topic over the combined
unigram + bigram support.

The sampling sweep is the hot loop; see _accel for the numba switch.
"""
from __future__ import annotations

import numpy as np

from .._accel import maybe_njit
from .corpus import TokenizedCorpus
from .result import Expression, Topic, TopicResult, sort_expressions


class ParameterError(ValueError):
    pass


@maybe_njit
def _lcg_uniform(state):
    # Lehmer generator, modulus 2^31-1: products stay below 2^47 so the
    # arithmetic is exact in int64 under both numba and CPython.
    s = state[0] * 48271 % 2147483647
    state[0] = s
    return s / 2147483647.0


def _gibbs_sweeps(
    tokens, doc_of, is_first, pair_id,
    n_docs, n_topics, n_vocab, n_pairs, pair_prev,
    alpha, beta, gamma, iterations, burn_in, seed,
):
    n_tokens = tokens.shape[0]
    nd = np.zeros((n_docs, n_topics), dtype=np.int64)
    nw = np.zeros((n_topics, n_vocab), dtype=np.int64)
    nwsum = np.zeros(n_topics, dtype=np.int64)
    mpair = np.zeros((n_topics, n_pairs), dtype=np.int64)
    mprevsum = np.zeros((n_topics, n_vocab), dtype=np.int64)
    psw = np.zeros((n_topics, n_vocab, 2), dtype=np.int64)

    acc_nd = np.zeros((n_docs, n_topics), dtype=np.float64)
    acc_nw = np.zeros((n_topics, n_vocab), dtype=np.float64)
    acc_pair = np.zeros((n_topics, n_pairs), dtype=np.float64)

    z = np.zeros(n_tokens, dtype=np.int64)
    x = np.zeros(n_tokens, dtype=np.int64)
    state = np.empty(1, dtype=np.int64)
    state[0] = (seed % 2147483646) + 1

    probs = np.empty(2 * n_topics, dtype=np.float64)

    # initialization: random topics, all tokens emitted as unigrams
    for i in range(n_tokens):
        t = int(_lcg_uniform(state) * n_topics)
        if t >= n_topics:
            t = n_topics - 1
        z[i] = t
        nd[doc_of[i], t] += 1
        nw[t, tokens[i]] += 1
        nwsum[t] += 1
        if is_first[i] == 0:
            psw[z[i - 1], tokens[i - 1], 0] += 1

    for sweep in range(iterations):
        for i in range(n_tokens):
            d = doc_of[i]
            w = tokens[i]
            t_old = z[i]
            x_old = x[i]
            has_next = i + 1 < n_tokens and is_first[i + 1] == 0

            # remove token i from the counts
            nd[d, t_old] -= 1
            if x_old == 0:
                nw[t_old, w] -= 1
                nwsum[t_old] -= 1
            else:
                mpair[t_old, pair_id[i]] -= 1
                mprevsum[t_old, tokens[i - 1]] -= 1
            if is_first[i] == 0:
                psw[z[i - 1], tokens[i - 1], x_old] -= 1
            if has_next:
                psw[t_old, w, x[i + 1]] -= 1

            vb = n_vocab * beta
            if is_first[i] == 1:
                # first token of a document never continues an n-gram
                total = 0.0
                for t in range(n_topics):
                    p = (alpha + nd[d, t]) * (beta + nw[t, w]) / (vb + nwsum[t])
                    total += p
                    probs[t] = total
                u = _lcg_uniform(state) * total
                t_new = n_topics - 1
                for t in range(n_topics):
                    if u < probs[t]:
                        t_new = t
                        break
                x_new = 0
            else:
                tp = z[i - 1]
                wp = tokens[i - 1]
                pswt = 2.0 * gamma + psw[tp, wp, 0] + psw[tp, wp, 1]
                total = 0.0
                for t in range(n_topics):
                    dt = alpha + nd[d, t]
                    p0 = (dt * (gamma + psw[tp, wp, 0]) / pswt
                          * (beta + nw[t, w]) / (vb + nwsum[t]))
                    p1 = (dt * (gamma + psw[tp, wp, 1]) / pswt
                          * (beta + mpair[t, pair_id[i]]) / (vb + mprevsum[t, wp]))
                    total += p0
                    probs[2 * t] = total
                    total += p1
                    probs[2 * t + 1] = total
                u = _lcg_uniform(state) * total
                idx = 2 * n_topics - 1
                for j in range(2 * n_topics):
                    if u < probs[j]:
                        idx = j
                        break
                t_new = idx // 2
                x_new = idx % 2

            z[i] = t_new
            x[i] = x_new
            nd[d, t_new] += 1
            if x_new == 0:
                nw[t_new, w] += 1
                nwsum[t_new] += 1
            else:
                mpair[t_new, pair_id[i]] += 1
                mprevsum[t_new, tokens[i - 1]] += 1
            if is_first[i] == 0:
                psw[z[i - 1], tokens[i - 1], x_new] += 1
            if has_next:
                psw[t_new, w, x[i + 1]] += 1

        if sweep >= burn_in:
            acc_nd += nd
            acc_nw += nw
            acc_pair += mpair

    return acc_nd, acc_nw, acc_pair


_gibbs_sweeps_compiled = maybe_njit(_gibbs_sweeps)


def extract_tng(
    corpus: TokenizedCorpus,
    k: int,
    alpha: float = 0.5,
    beta: float = 0.01,
    gamma: float = 0.1,
    iterations: int = 200,
    burn_in: int = 50,
    top_k: int = 10,
    seed: int = 1,
) -> TopicResult:
    if k < 2:
        raise ParameterError("k must be >= 2")
    if k > len(corpus.documents):
        raise ParameterError("k exceeds the number of non-empty documents")
    if not (iterations > burn_in >= 0):
        raise ParameterError("need iterations > burn_in >= 0")

    vocab = corpus.vocabulary
    n_vocab = len(vocab)
    doc_keys = [key for key, _ in corpus.documents]

    tokens_list: list[int] = []
    doc_of_list: list[int] = []
    is_first_list: list[int] = []
    for d, (_, words) in enumerate(corpus.documents):
        for j, word in enumerate(words):
            tokens_list.append(vocab[word])
            doc_of_list.append(d)
            is_first_list.append(1 if j == 0 else 0)

    tokens = np.asarray(tokens_list, dtype=np.int64)
    doc_of = np.asarray(doc_of_list, dtype=np.int64)
    is_first = np.asarray(is_first_list, dtype=np.int64)

    # index every observed adjacent pair; bigram counts are kept per pair id
    pair_index: dict[tuple[int, int], int] = {}
    pair_id = np.full(tokens.shape[0], -1, dtype=np.int64)
    for i in range(tokens.shape[0]):
        if is_first[i]:
            continue
        pair = (int(tokens[i - 1]), int(tokens[i]))
        if pair not in pair_index:
            pair_index[pair] = len(pair_index)
        pair_id[i] = pair_index[pair]
    n_pairs = max(len(pair_index), 1)
    pair_prev = np.zeros(n_pairs, dtype=np.int64)
    for (prev, _), pid in pair_index.items():
        pair_prev[pid] = prev

    acc_nd, acc_nw, acc_pair = _gibbs_sweeps_compiled(
        tokens, doc_of, is_first, pair_id,
        len(corpus.documents), k, n_vocab, n_pairs, pair_prev,
        float(alpha), float(beta), float(gamma),
        int(iterations), int(burn_in), int(seed),
    )

    words = sorted(vocab, key=vocab.get)
    pair_text = {pid: f"{words[a]} {words[b]}" for (a, b), pid in pair_index.items()}

    topics: list[Topic] = []
    internal: dict[int, dict[str, float]] = {}
    for t in range(k):
        total = acc_nw[t].sum() + acc_pair[t].sum()
        table: dict[str, float] = {}
        if total > 0:
            for v in range(n_vocab):
                if acc_nw[t, v] > 0:
                    table[words[v]] = acc_nw[t, v] / total
            for pid, text in pair_text.items():
                if acc_pair[t, pid] > 0:
                    table[text] = table.get(text, 0.0) + acc_pair[t, pid] / total
        internal[t] = table
        expressions = sort_expressions(
            Expression(text, float(min(score, 1.0))) for text, score in table.items())
        topics.append(Topic(t, expressions[:top_k]))

    assignments: dict[str, frozenset[int]] = {}
    for d, key in enumerate(doc_keys):
        row = acc_nd[d]
        best = int(np.flatnonzero(row == row.max())[0])  # ties to smaller id
        assignments[key] = frozenset({best})

    params = {"k": k, "alpha": alpha, "beta": beta, "gamma": gamma,
              "iterations": iterations, "burn_in": burn_in, "top_k": top_k}
    return TopicResult("tng", params, seed, topics, assignments, internal)
