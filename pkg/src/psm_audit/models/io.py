"""Versioned model files.

Layout: a pickled dict {"format", "version", "kind", "state"} at protocol 4.
The state dict holds raw counts plus params, so a round-tripped model answers
prob() identically. Only files written by this toolkit should be loaded;
pickle offers no safety against adversarial files.
"""

from __future__ import annotations

import pickle

from ..errors import ModelFormatError
from .base import PasswordModel
from .chunk import ChunkPcfgModel
from .listmodel import ListModel
from .markov import AdaptiveNGramModel, BackoffModel, NGramModel
from .pcfg import PcfgModel

FORMAT = "psm-audit-model"
VERSION = 1

MODEL_CLASSES = {
    cls.kind: cls
    for cls in (ListModel, NGramModel, AdaptiveNGramModel, BackoffModel,
                PcfgModel, ChunkPcfgModel)
}


def serialize(model: PasswordModel, path) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "state": model.to_state(),
    }
    with open(path, "wb") as fh:
        pickle.dump(payload, fh, protocol=4)


def deserialize(path) -> PasswordModel:
    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (pickle.UnpicklingError, EOFError, AttributeError, IndexError,
            ImportError, MemoryError, UnicodeDecodeError, ValueError) as exc:
        raise ModelFormatError(f"cannot decode model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise ModelFormatError(f"{path} is not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise ModelFormatError(
            f"{path} has version {payload.get('version')!r}, expected {VERSION}")
    kind = payload.get("kind")
    cls = MODEL_CLASSES.get(kind)
    if cls is None:
        raise ModelFormatError(f"{path} holds unknown model kind {kind!r}")
    try:
        return cls.from_state(payload["state"])
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path} state is incomplete: {exc}") from exc
