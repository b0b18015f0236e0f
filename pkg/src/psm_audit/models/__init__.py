"""Trainable password models and their shared operations."""

from __future__ import annotations

from ..corpus import PasswordCorpus
from .base import Candidate, CandidateStream, PasswordModel
from .chunk import ChunkPcfgModel, bpe_learn, segment
from .io import MODEL_CLASSES, deserialize, serialize
from .listmodel import ListModel
from .markov import AdaptiveNGramModel, BackoffModel, NGramModel
from .pcfg import PcfgModel

__all__ = [
    "AdaptiveNGramModel",
    "BackoffModel",
    "Candidate",
    "CandidateStream",
    "ChunkPcfgModel",
    "ListModel",
    "MODEL_CLASSES",
    "NGramModel",
    "PasswordModel",
    "PcfgModel",
    "bpe_learn",
    "deserialize",
    "segment",
    "serialize",
    "train",
]


def train(kind: str, corpus: PasswordCorpus, **params) -> PasswordModel:
    """Train a model of the requested kind.

    Kinds: list, ngram, adaptive, backoff, pcfg, chunk_pcfg. Unknown kinds or
    parameters the kind does not accept raise ValueError. Training is
    deterministic given corpus, params and seed.
    """
    cls = MODEL_CLASSES.get(kind)
    if cls is None:
        raise ValueError(
            f"unknown model kind {kind!r}; expected one of {sorted(MODEL_CLASSES)}")
    try:
        return cls.train(corpus, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for kind {kind!r}: {exc}") from exc
