"""Corpus preparation: canonical threads to tokenized documents.

One document per post; the document key is "<thread_id>/<post_id>" so keys
stay unique across threads.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

from ..model import CanonicalThread


class EmptyCorpusError(ValueError):
    pass


_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def doc_key(thread_id: str, post_id: str) -> str:
    return f"{thread_id}/{post_id}"


def load_stopwords(list_id: str = "english") -> frozenset[str]:
    if list_id == "none":
        return frozenset()
    if list_id != "english":
        raise ValueError(f"unknown stopword list {list_id!r}")
    text = resources.files("commentwatcher.data").joinpath("stopwords_en.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@dataclass(frozen=True)
class CorpusOptions:
    lowercase: bool = True
    min_token_len: int = 2
    min_doc_freq: int = 1
    stopword_list_id: str = "english"


@dataclass
class TokenizedCorpus:
    documents: list[tuple[str, list[str]]]  # (doc key, tokens), non-empty docs only
    vocabulary: dict[str, int]
    stopword_list_id: str
    options: CorpusOptions
    empty_doc_keys: list[str] = field(default_factory=list)


def tokenize(text: str, options: CorpusOptions, stopwords: frozenset[str]) -> list[str]:
    tokens = _TOKEN_RE.findall(text)
    if options.lowercase:
        tokens = [t.lower() for t in tokens]
    return [t for t in tokens
            if len(t) >= options.min_token_len and t not in stopwords]


def prepare_corpus(
    threads: Iterable[CanonicalThread],
    options: CorpusOptions = CorpusOptions(),
) -> TokenizedCorpus:
    stopwords = load_stopwords(options.stopword_list_id)
    docs: list[tuple[str, list[str]]] = []
    for t in threads:
        for p in t.posts:
            docs.append((doc_key(t.thread_id, p.post_id),
                         tokenize(p.content, options, stopwords)))

    if options.min_doc_freq > 1:
        df: dict[str, int] = {}
        for _, tokens in docs:
            for token in set(tokens):
                df[token] = df.get(token, 0) + 1
        docs = [(k, [t for t in tokens if df[t] >= options.min_doc_freq])
                for k, tokens in docs]

    kept = [(k, tokens) for k, tokens in docs if tokens]
    empty = [k for k, tokens in docs if not tokens]
    if not kept:
        raise EmptyCorpusError("no documents left after filtering")

    vocabulary = {t: i for i, t in enumerate(
        sorted({tok for _, tokens in kept for tok in tokens}))}
    return TokenizedCorpus(kept, vocabulary, options.stopword_list_id, options, empty)
