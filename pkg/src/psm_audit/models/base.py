"""Model interface and the shared best-first candidate enumerators.

Every trained model exposes `prob`, per-token probabilities, deterministic
top-G enumeration and ancestral sampling. Enumeration is exact: candidates
come out in non-increasing probability with ties broken by lexicographic
order of the password, which makes brute-force comparison tests possible on
tiny universes.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
from typing import Iterator, NamedTuple

# Sentinels outside the printable-ASCII password alphabet.
START = "\x02"
END = "\x03"


class Candidate(NamedTuple):
    rank: int
    password: str
    prob: float


class CandidateStream:
    """Single-consumer cursor over a model's candidates in rank order.

    Probabilities are non-increasing in rank and no password repeats. The
    stream ends early (without error) when the model's support is exhausted.
    """

    def __init__(self, model, pairs: Iterator, limit: int):
        self.model = model
        self._pairs = pairs
        self._limit = limit
        self._rank = 0

    def __iter__(self) -> "CandidateStream":
        return self

    def __next__(self) -> Candidate:
        if self._rank >= self._limit:
            raise StopIteration
        password, p = next(self._pairs)
        self._rank += 1
        return Candidate(self._rank, password, p)


class PasswordModel:
    """Interface shared by all trained password models.

    A trained model is immutable; `prob` and `enumerate_top` are safe for
    concurrent readers. Each CandidateStream is single-consumer.
    """

    kind: str = "abstract"

    # -- queries ------------------------------------------------------------

    def prob(self, password: str) -> float:
        """Estimated probability of `password`; 0.0 for anything unseen or
        outside the model's alphabet (never an error)."""
        raise NotImplementedError

    def token_probs(self, password: str) -> list:
        """Per-token probabilities underlying prob(): per-character
        conditionals for Markov-family models, template then per-segment
        probabilities for grammar models."""
        raise NotImplementedError

    def enumerate_top(self, g: int) -> CandidateStream:
        if g < 1:
            raise ValueError("g must be >= 1")
        return CandidateStream(self, self._candidates(), g)

    def sample(self, rng) -> tuple:
        """Draw one (password, probability) pair from the model's own
        distribution using ancestral sampling."""
        raise NotImplementedError

    # -- internals ----------------------------------------------------------

    def _candidates(self) -> Iterator:
        """Yield (password, prob) in non-increasing prob, ties lexicographic."""
        raise NotImplementedError

    # -- serialization ------------------------------------------------------

    @property
    def params(self) -> dict:
        raise NotImplementedError

    def to_state(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_state(cls, state: dict) -> "PasswordModel":
        raise NotImplementedError


def markov_candidates(successors) -> Iterator:
    """Exact best-first enumeration for left-to-right character models.

    `successors(prefix)` returns [(symbol, conditional)] sorted by descending
    conditional then symbol, where symbol is a character or END; zero
    conditionals must already be filtered out. Probabilities accumulate as
    left-to-right float products, matching prob() bit for bit.

    Expansion is lazy (first-child + next-sibling), so the frontier stays
    proportional to the number of pops. Candidates sharing one probability
    are collected and emitted in lexicographic order, which gives a globally
    deterministic stream.
    """
    seq = itertools.count()
    heap = []

    def push(prefix: str, prefix_prob: float, idx: int, succ: list):
        symbol, cond = succ[idx]
        p = prefix_prob * cond
        if p <= 0.0:
            return
        child_str = prefix if symbol == END else prefix + symbol
        heapq.heappush(heap, (-p, child_str, next(seq), prefix, prefix_prob, idx))

    root = successors("")
    if root:
        push("", 1.0, 0, root)

    while heap:
        group_p = -heap[0][0]
        complete: list = []
        while heap and -heap[0][0] == group_p:
            negp, child_str, _, prefix, prefix_prob, idx = heapq.heappop(heap)
            succ = successors(prefix)
            symbol, _cond = succ[idx]
            if idx + 1 < len(succ):
                push(prefix, prefix_prob, idx + 1, succ)
            if symbol == END:
                complete.append(child_str)
            else:
                child_succ = successors(child_str)
                if child_succ:
                    push(child_str, -negp, 0, child_succ)
        for password in sorted(complete):
            yield password, group_p


def template_candidates(templates: list, tables: dict, canonical=None) -> Iterator:
    """Exact best-first enumeration for template-grammar models.

    `templates` is [(template, prob)] where a template is a tuple of table
    keys; `tables[key]` is [(terminal, prob)] sorted by descending prob then
    terminal. A candidate's probability is template_prob * product of its
    terminal probs, multiplied left to right exactly as prob() does.

    `canonical`, when given, receives (password, segments) and must return
    whether this derivation is the one prob() would use; non-canonical
    derivations are expanded but not emitted, so chunk-grammar streams only
    contain passwords at their canonical probability.
    """
    seq = itertools.count()
    heap = []
    visited = set()

    def derivation_prob(t_idx: int, vector: tuple) -> float:
        template, t_prob = templates[t_idx]
        p = t_prob
        for key, v in zip(template, vector):
            p *= tables[key][v][1]
        return p

    def password_of(t_idx: int, vector: tuple) -> tuple:
        template, _ = templates[t_idx]
        segs = tuple(tables[key][v][0] for key, v in zip(template, vector))
        return "".join(segs), segs

    def push(t_idx: int, vector: tuple):
        if (t_idx, vector) in visited:
            return
        visited.add((t_idx, vector))
        p = derivation_prob(t_idx, vector)
        if p <= 0.0:
            return
        password, segs = password_of(t_idx, vector)
        heapq.heappush(heap, (-p, password, next(seq), t_idx, vector, segs))

    for t_idx, (template, _) in enumerate(templates):
        if all(tables[key] for key in template):
            push(t_idx, (0,) * len(template))

    while heap:
        group_p = -heap[0][0]
        complete: list = []
        while heap and -heap[0][0] == group_p:
            _, password, _, t_idx, vector, segs = heapq.heappop(heap)
            if canonical is None or canonical(password, segs):
                complete.append(password)
            template, _tp = templates[t_idx]
            for j, key in enumerate(template):
                if vector[j] + 1 < len(tables[key]):
                    succ = vector[:j] + (vector[j] + 1,) + vector[j + 1:]
                    push(t_idx, succ)
        for password in sorted(complete):
            yield password, group_p


def weighted_choice(rng, cumulative: list, items: list):
    """Pick items[i] where i is the first cumulative weight above a uniform draw."""
    x = rng.random() * cumulative[-1]
    return items[min(bisect.bisect_right(cumulative, x), len(items) - 1)]
