"""Extraction job execution and parameter validation, shared by the HTTP
API (async worker pool) and the CLI (synchronous)."""
from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Optional

from .store import STATUS_DONE, STATUS_FAILED, STATUS_RUNNING, Store
from .topics import (
    CorpusOptions,
    ParameterError,
    extract_ckp,
    extract_tng,
    prepare_corpus,
    serialize_result,
)

ALGORITHMS = ("tng", "ckp")

_TNG_DEFAULTS = {"k": 5, "alpha": 0.5, "beta": 0.01, "gamma": 0.1,
                 "iterations": 200, "burn_in": 50, "top_k": 10, "seed": 1}
_CKP_DEFAULTS = {"k": 5, "overlap_threshold": 0.8, "min_support": 1,
                 "max_iters": 50, "top_k": 10, "seed": 1}
_INT_KEYS = {"k", "iterations", "burn_in", "top_k", "seed", "min_support", "max_iters"}
_FLOAT_KEYS = {"alpha", "beta", "gamma", "overlap_threshold"}
_CORPUS_KEYS = {"lowercase", "min_token_len", "min_doc_freq", "stopwords"}


def validate_params(algorithm: str, params: dict[str, Any]) -> dict[str, Any]:
    """Normalize and validate extraction parameters; raises ParameterError."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    defaults = _TNG_DEFAULTS if algorithm == "tng" else _CKP_DEFAULTS
    out = dict(defaults)
    for key, value in params.items():
        if key in _CORPUS_KEYS:
            out[key] = value
            continue
        if key not in defaults:
            raise ParameterError(f"unknown parameter {key!r} for {algorithm}")
        try:
            out[key] = int(value) if key in _INT_KEYS else float(value)
        except (TypeError, ValueError):
            raise ParameterError(f"bad value for {key!r}: {value!r}")
    if out["k"] < 2:
        raise ParameterError("k must be >= 2")
    if algorithm == "tng":
        if not (out["iterations"] > out["burn_in"] >= 0):
            raise ParameterError("need iterations > burn_in >= 0")
    else:
        if not (0.0 < out["overlap_threshold"] <= 1.0):
            raise ParameterError("overlap_threshold must be in (0, 1]")
        if out["min_support"] < 1:
            raise ParameterError("min_support must be >= 1")
    if out["top_k"] < 1:
        raise ParameterError("top_k must be >= 1")
    return out


def corpus_options(params: dict[str, Any]) -> CorpusOptions:
    return CorpusOptions(
        lowercase=str(params.get("lowercase", "true")).lower() != "false",
        min_token_len=int(params.get("min_token_len", 2)),
        min_doc_freq=int(params.get("min_doc_freq", 1)),
        stopword_list_id=str(params.get("stopwords", "english")),
    )


def run_extraction(store: Store, extraction_id: str,
                   now: Optional[datetime] = None) -> None:
    """Execute a pending extraction record to done or failed."""
    rec = store.get_extraction(extraction_id)
    store.update_extraction_status(extraction_id, STATUS_RUNNING)
    finished = now or datetime.now(timezone.utc).replace(microsecond=0)
    try:
        threads = [store.get_thread(tid) for tid in rec.thread_ids]
        corpus = prepare_corpus(threads, corpus_options(rec.params))
        algo_params = {k: v for k, v in rec.params.items() if k not in _CORPUS_KEYS}
        if rec.algorithm == "tng":
            result = extract_tng(corpus, **algo_params)
        else:
            result = extract_ckp(corpus, **algo_params)
        store.update_extraction_status(
            extraction_id, STATUS_DONE,
            result=serialize_result(result), finished_at=finished)
    except Exception as e:
        store.update_extraction_status(
            extraction_id, STATUS_FAILED, error=str(e), finished_at=finished)
        raise
