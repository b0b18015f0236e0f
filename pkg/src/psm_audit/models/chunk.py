"""Chunk-level grammar: BPE segmentation feeding a template model.

A byte-pair-encoding merge table is learned from the corpus; every password
then segments deterministically into chunks. Chunks are labelled by class
composition and length (L/D/S for single-class, DM for mixed), the label
sequence is the template, and probabilities factor exactly as in the plain
template grammar. Only canonical derivations (those whose chunk sequence
matches the segmenter) are enumerated or sampled, keeping generated
probabilities consistent with prob().
"""

from __future__ import annotations

import heapq

from ..corpus import PasswordCorpus
from .pcfg import PcfgModel, _char_class


def bpe_learn(corpus: PasswordCorpus, vocab_size: int) -> list:
    """Greedy pair-merge training to a target vocabulary size.

    Pairs are ranked by total weighted frequency, ties by lexicographic pair,
    so training is deterministic. Returns the merge list in learned order;
    vocab_size counts single characters plus merges.
    """
    alphabet = set()
    for pwd in corpus.counts:
        alphabet.update(pwd)
    if vocab_size < len(alphabet):
        raise ValueError(
            f"vocab_size {vocab_size} is below alphabet size {len(alphabet)}")

    words = [[list(pwd), c] for pwd, c in sorted(corpus.counts.items())]
    pair_stats: dict = {}
    pair_words: dict = {}
    # Lazy-invalidation max heap: entries go stale when a pair's count moves,
    # so each pop is checked against the live count before use.
    heap: list = []

    def bump(pair: tuple, delta: int):
        n = pair_stats.get(pair, 0) + delta
        pair_stats[pair] = n
        # Push on every positive landing count: decrements also need a fresh
        # entry or the pair would go stale in the heap forever.
        if n > 0:
            heapq.heappush(heap, (-n, pair))

    def add_word(wi: int, sign: int):
        symbols, count = words[wi]
        for a, b in zip(symbols, symbols[1:]):
            pair = (a, b)
            bump(pair, sign * count)
            if sign > 0:
                pair_words.setdefault(pair, set()).add(wi)

    for wi in range(len(words)):
        add_word(wi, +1)

    merges = []
    while len(merges) < vocab_size - len(alphabet):
        best = None
        while heap:
            neg_n, pair = heapq.heappop(heap)
            if pair_stats.get(pair, 0) == -neg_n:
                best = pair
                break
        if best is None:
            break
        merges.append(best)
        for wi in sorted(pair_words.get(best, ())):
            symbols, _count = words[wi]
            if best not in zip(symbols, symbols[1:]):
                continue
            add_word(wi, -1)
            words[wi][0] = _merge_once(symbols, best)
            add_word(wi, +1)
        pair_stats[best] = 0
    return merges


def _merge_once(symbols: list, pair: tuple) -> list:
    """Merge all occurrences of `pair`, scanning left to right."""
    a, b = pair
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == a and symbols[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def segment(merges: list, password: str) -> list:
    """Apply merges in learned priority order; chunks concatenate back to the password."""
    ranks = {pair: i for i, pair in enumerate(merges)}
    symbols = list(password)
    while len(symbols) > 1:
        pairs = {(a, b) for a, b in zip(symbols, symbols[1:]) if (a, b) in ranks}
        if not pairs:
            break
        best = min(pairs, key=ranks.__getitem__)
        symbols = _merge_once(symbols, best)
    return symbols


def chunk_tag(chunk: str) -> str:
    classes = {_char_class(ch) for ch in chunk}
    if len(classes) == 1:
        return classes.pop()
    return "DM"


class ChunkPcfgModel(PcfgModel):
    kind = "chunk_pcfg"

    def __init__(self, merges: list, vocab_size: int, template_counts: dict,
                 terminal_counts: dict, corpus_fingerprint: str = "",
                 source_label: str = ""):
        super().__init__(template_counts, terminal_counts,
                         corpus_fingerprint, source_label)
        self.merges = [tuple(m) for m in merges]
        self.vocab_size = vocab_size
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}

    @classmethod
    def train(cls, corpus: PasswordCorpus, vocab_size: int = 10_000) -> "ChunkPcfgModel":
        merges = bpe_learn(corpus, vocab_size)
        template_counts: dict = {}
        terminal_counts: dict = {}
        for pwd, c in corpus.counts.items():
            chunks = segment(merges, pwd)
            template = tuple((chunk_tag(ch), len(ch)) for ch in chunks)
            template_counts[template] = template_counts.get(template, 0) + c
            for key, chunk in zip(template, chunks):
                table = terminal_counts.setdefault(key, {})
                table[chunk] = table.get(chunk, 0) + c
        return cls(merges, vocab_size, template_counts, terminal_counts,
                   corpus.fingerprint(), corpus.source_label)

    def _segment(self, password: str) -> list:
        symbols = list(password)
        while len(symbols) > 1:
            pairs = {(a, b) for a, b in zip(symbols, symbols[1:])
                     if (a, b) in self._ranks}
            if not pairs:
                break
            best = min(pairs, key=self._ranks.__getitem__)
            symbols = _merge_once(symbols, best)
        return symbols

    def _parse(self, password: str):
        chunks = self._segment(password)
        template = tuple((chunk_tag(ch), len(ch)) for ch in chunks)
        return template, chunks

    def _canonical(self, password: str, segments: tuple) -> bool:
        return self._segment(password) == list(segments)

    @property
    def params(self) -> dict:
        return {"vocab_size": self.vocab_size}

    def to_state(self) -> dict:
        state = super().to_state()
        state["merges"] = self.merges
        state["vocab_size"] = self.vocab_size
        return state

    @classmethod
    def from_state(cls, state: dict) -> "ChunkPcfgModel":
        return cls(state["merges"], state["vocab_size"],
                   state["template_counts"], state["terminal_counts"],
                   state["corpus_fingerprint"], state["source_label"])
