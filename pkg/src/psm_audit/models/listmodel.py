"""List model: relative frequencies over the training multiset, 0 elsewhere."""

from __future__ import annotations

from ..corpus import PasswordCorpus
from .base import Candidate, PasswordModel, weighted_choice


class ListModel(PasswordModel):
    kind = "list"

    def __init__(self, counts: dict, total: int, corpus_fingerprint: str = "",
                 source_label: str = ""):
        self.counts = counts
        self.total = total
        self.corpus_fingerprint = corpus_fingerprint
        self.source_label = source_label
        self._sample_cache = None

    @classmethod
    def train(cls, corpus: PasswordCorpus) -> "ListModel":
        return cls(dict(corpus.counts), corpus.total,
                   corpus.fingerprint(), corpus.source_label)

    def prob(self, password: str) -> float:
        return self.counts.get(password, 0) / self.total

    def token_probs(self, password: str) -> list:
        return [self.prob(password)]

    def _candidates(self):
        for pwd in sorted(self.counts, key=lambda p: (-self.counts[p], p)):
            yield pwd, self.counts[pwd] / self.total

    def sample(self, rng):
        if self._sample_cache is None:
            items = sorted(self.counts)
            cumulative = []
            acc = 0
            for pwd in items:
                acc += self.counts[pwd]
                cumulative.append(acc)
            self._sample_cache = (cumulative, items)
        cumulative, items = self._sample_cache
        pwd = weighted_choice(rng, cumulative, items)
        return pwd, self.prob(pwd)

    @property
    def params(self) -> dict:
        return {}

    def to_state(self) -> dict:
        return {
            "counts": self.counts,
            "total": self.total,
            "corpus_fingerprint": self.corpus_fingerprint,
            "source_label": self.source_label,
        }

    @classmethod
    def from_state(cls, state: dict) -> "ListModel":
        return cls(state["counts"], state["total"],
                   state["corpus_fingerprint"], state["source_label"])
