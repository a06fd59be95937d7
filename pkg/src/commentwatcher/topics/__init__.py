from .corpus import (
    CorpusOptions,
    EmptyCorpusError,
    TokenizedCorpus,
    doc_key,
    load_stopwords,
    prepare_corpus,
)
from .ckp import extract_ckp
from .result import (
    Expression,
    Topic,
    TopicResult,
    deserialize_result,
    serialize_result,
)
from .tng import ParameterError, extract_tng

__all__ = [
    "CorpusOptions", "EmptyCorpusError", "TokenizedCorpus", "doc_key",
    "load_stopwords", "prepare_corpus", "extract_ckp", "Expression", "Topic",
    "TopicResult", "deserialize_result", "serialize_result", "ParameterError",
    "extract_tng",
]
