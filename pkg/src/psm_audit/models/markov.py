"""Markov-family models: plain n-gram, noise-hardened n-gram, and backoff.

All three share the same query surface: a password's probability is the
left-to-right product of per-character conditionals, including a final
end-symbol conditional, so the distribution over finite strings is properly
normalized (up to the configured length cap, beyond which prob is 0).
"""

from __future__ import annotations

import numpy as np

from ..corpus import DEFAULT_MAX_LEN, PasswordCorpus
from .base import END, START, PasswordModel, markov_candidates, weighted_choice

# Ancestral sampling retries when a walk overruns the length cap. The cap
# truncates a vanishing tail of the distribution, so retries are rare.
_SAMPLE_RETRIES = 1000


class NGramModel(PasswordModel):
    """Order-n Markov chain over characters with additive smoothing.

    Conditionals are (count + k_s) / (row_total + k_s * (|alphabet| + 1)),
    the +1 covering the end symbol, so every context row sums to one over
    alphabet-plus-end. Characters outside the training alphabet get
    probability 0, as do strings longer than max_len.
    """

    kind = "ngram"

    def __init__(self, order: int, smoothing: float, max_len: int,
                 alphabet: str, counts: dict, corpus_fingerprint: str = "",
                 source_label: str = ""):
        if order < 2:
            raise ValueError("n-gram order must be >= 2")
        self.order = order
        self.smoothing = smoothing
        self.max_len = max_len
        self.alphabet = alphabet
        self.counts = counts
        self.corpus_fingerprint = corpus_fingerprint
        self.source_label = source_label
        self._row_totals = {ctx: sum(row.values()) for ctx, row in counts.items()}
        self._succ_cache: dict = {}
        self._sample_cache: dict = {}

    # -- training -----------------------------------------------------------

    @staticmethod
    def _accumulate(corpus: PasswordCorpus, order: int) -> tuple:
        counts: dict = {}
        chars = set()
        for pwd, c in corpus.counts.items():
            chars.update(pwd)
            ctx = START * (order - 1)
            for ch in pwd + END:
                row = counts.setdefault(ctx, {})
                row[ch] = row.get(ch, 0) + c
                ctx = ctx[1:] + ch
        return counts, "".join(sorted(chars))

    @classmethod
    def train(cls, corpus: PasswordCorpus, order: int = 4,
              smoothing: float = 0.01,
              max_len: int = DEFAULT_MAX_LEN) -> "NGramModel":
        counts, alphabet = cls._accumulate(corpus, order)
        return cls(order, smoothing, max_len, alphabet, counts,
                   corpus.fingerprint(), corpus.source_label)

    # -- queries ------------------------------------------------------------

    def _cond(self, ctx: str, symbol: str) -> float:
        row = self.counts.get(ctx)
        count = row.get(symbol, 0) if row else 0
        row_total = self._row_totals.get(ctx, 0)
        denom = row_total + self.smoothing * (len(self.alphabet) + 1)
        if denom == 0.0:
            return 0.0
        return (count + self.smoothing) / denom

    def token_probs(self, password: str) -> list:
        if len(password) > self.max_len:
            return [0.0]
        out = []
        ctx = START * (self.order - 1)
        for ch in password + END:
            if ch != END and ch not in self.alphabet:
                out.append(0.0)
            else:
                out.append(self._cond(ctx, ch))
            ctx = ctx[1:] + ch
        return out

    def prob(self, password: str) -> float:
        if len(password) > self.max_len:
            return 0.0
        p = 1.0
        ctx = START * (self.order - 1)
        for ch in password + END:
            if ch != END and ch not in self.alphabet:
                return 0.0
            p *= self._cond(ctx, ch)
            if p == 0.0:
                return 0.0
            ctx = ctx[1:] + ch
        return p

    # -- enumeration and sampling --------------------------------------------

    def _context_of(self, prefix: str) -> str:
        return (START * (self.order - 1) + prefix)[-(self.order - 1):]

    def _successors(self, prefix: str):
        at_cap = len(prefix) >= self.max_len
        key = (self._context_of(prefix), at_cap)
        cached = self._succ_cache.get(key)
        if cached is None:
            ctx = key[0]
            symbols = END if at_cap else self.alphabet + END
            pairs = [(s, self._cond(ctx, s)) for s in symbols]
            cached = sorted(((s, c) for s, c in pairs if c > 0.0),
                            key=lambda sc: (-sc[1], sc[0]))
            self._succ_cache[key] = cached
        return cached

    def _candidates(self):
        return markov_candidates(self._successors)

    def sample(self, rng):
        for _ in range(_SAMPLE_RETRIES):
            prefix = ""
            p = 1.0
            while True:
                succ = self._successors(prefix)
                if not succ:
                    break
                key = self._context_of(prefix), len(prefix) >= self.max_len
                cached = self._sample_cache.get(key)
                if cached is None:
                    cumulative = []
                    acc = 0.0
                    for _s, c in succ:
                        acc += c
                        cumulative.append(acc)
                    cached = cumulative
                    self._sample_cache[key] = cached
                symbol, cond = weighted_choice(rng, cached, succ)
                p *= cond
                if symbol == END:
                    return prefix, p
                prefix += symbol
        raise RuntimeError("sampling failed to terminate within the length cap")

    # -- serialization ------------------------------------------------------

    @property
    def params(self) -> dict:
        return {"order": self.order, "smoothing": self.smoothing,
                "max_len": self.max_len}

    def to_state(self) -> dict:
        return {
            "order": self.order,
            "smoothing": self.smoothing,
            "max_len": self.max_len,
            "alphabet": self.alphabet,
            "counts": self.counts,
            "corpus_fingerprint": self.corpus_fingerprint,
            "source_label": self.source_label,
        }

    @classmethod
    def from_state(cls, state: dict) -> "NGramModel":
        return cls(state["order"], state["smoothing"], state["max_len"],
                   state["alphabet"], state["counts"],
                   state["corpus_fingerprint"], state["source_label"])


class AdaptiveNGramModel(NGramModel):
    """N-gram whose transition counts absorb Bernoulli noise at training time.

    Every observed n-gram increment independently gains an extra +1 with
    probability gamma, drawn from a seeded generator; with gamma = 0 the
    counts equal the plain NGramModel's exactly. The noise blurs the gap
    between trained and untrained strings, trading accuracy for privacy.
    """

    kind = "adaptive"

    def __init__(self, order: int, smoothing: float, max_len: int,
                 alphabet: str, counts: dict, gamma: float, seed: int,
                 corpus_fingerprint: str = "", source_label: str = ""):
        super().__init__(order, smoothing, max_len, alphabet, counts,
                         corpus_fingerprint, source_label)
        self.gamma = gamma
        self.seed = seed

    @classmethod
    def train(cls, corpus: PasswordCorpus, order: int = 4,
              gamma: float = 5e-6, seed: int = 0, smoothing: float = 0.01,
              max_len: int = DEFAULT_MAX_LEN) -> "AdaptiveNGramModel":
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        counts, alphabet = cls._accumulate(corpus, order)
        if gamma > 0.0:
            rng = np.random.default_rng(seed)
            # Sorted traversal keeps the draw sequence reproducible. One
            # binomial draw per distinct n-gram aggregates its per-occurrence
            # Bernoulli trials.
            for ctx in sorted(counts):
                row = counts[ctx]
                for ch in sorted(row):
                    extra = int(rng.binomial(row[ch], gamma))
                    if extra:
                        row[ch] += extra
        return cls(order, smoothing, max_len, alphabet, counts, gamma, seed,
                   corpus.fingerprint(), corpus.source_label)

    @property
    def params(self) -> dict:
        return {"order": self.order, "smoothing": self.smoothing,
                "max_len": self.max_len, "gamma": self.gamma, "seed": self.seed}

    def to_state(self) -> dict:
        state = super().to_state()
        state["gamma"] = self.gamma
        state["seed"] = self.seed
        return state

    @classmethod
    def from_state(cls, state: dict) -> "AdaptiveNGramModel":
        return cls(state["order"], state["smoothing"], state["max_len"],
                   state["alphabet"], state["counts"], state["gamma"],
                   state["seed"], state["corpus_fingerprint"],
                   state["source_label"])


class BackoffModel(PasswordModel):
    """Variable-order Markov model that backs off to shorter contexts.

    Counts are kept for every context length up to max_order - 1. At each
    position the longest context whose occurrence count reaches threshold is
    used, and the conditional is the raw count ratio at that level, so the
    chosen row always sums to one. No additive smoothing: transitions unseen
    at the chosen level get probability 0.
    """

    kind = "backoff"

    def __init__(self, max_order: int, threshold: int, max_len: int,
                 alphabet: str, counts: dict, corpus_fingerprint: str = "",
                 source_label: str = ""):
        if max_order < 2:
            raise ValueError("max_order must be >= 2")
        self.max_order = max_order
        self.threshold = threshold
        self.max_len = max_len
        self.alphabet = alphabet
        self.counts = counts
        self.corpus_fingerprint = corpus_fingerprint
        self.source_label = source_label
        self._row_totals = {ctx: sum(row.values()) for ctx, row in counts.items()}
        self._succ_cache: dict = {}
        self._sample_cache: dict = {}

    @classmethod
    def train(cls, corpus: PasswordCorpus, max_order: int = 5,
              threshold: int = 10,
              max_len: int = DEFAULT_MAX_LEN) -> "BackoffModel":
        counts: dict = {}
        chars = set()
        width = max_order - 1
        for pwd, c in corpus.counts.items():
            chars.update(pwd)
            history = START * width
            for ch in pwd + END:
                for k in range(width + 1):
                    ctx = history[width - k:]
                    row = counts.setdefault(ctx, {})
                    row[ch] = row.get(ch, 0) + c
                history = (history + ch)[-width:]
        return cls(max_order, threshold, max_len, "".join(sorted(chars)),
                   counts, corpus.fingerprint(), corpus.source_label)

    def _pick_context(self, history: str) -> str:
        for start in range(len(history) + 1):
            ctx = history[start:]
            if self._row_totals.get(ctx, 0) >= self.threshold:
                return ctx
        # Degenerate tiny corpus: even the empty context is below threshold.
        return ""

    def _history_of(self, prefix: str) -> str:
        width = self.max_order - 1
        return (START * width + prefix)[-width:]

    def token_probs(self, password: str) -> list:
        if len(password) > self.max_len:
            return [0.0]
        out = []
        width = self.max_order - 1
        history = START * width
        for ch in password + END:
            ctx = self._pick_context(history)
            row = self.counts.get(ctx, {})
            total = self._row_totals.get(ctx, 0)
            out.append(row.get(ch, 0) / total if total else 0.0)
            history = (history + ch)[-width:]
        return out

    def prob(self, password: str) -> float:
        if len(password) > self.max_len:
            return 0.0
        p = 1.0
        width = self.max_order - 1
        history = START * width
        for ch in password + END:
            ctx = self._pick_context(history)
            total = self._row_totals.get(ctx, 0)
            if total == 0:
                return 0.0
            p *= self.counts.get(ctx, {}).get(ch, 0) / total
            if p == 0.0:
                return 0.0
            history = (history + ch)[-width:]
        return p

    def _successors(self, prefix: str):
        history = self._history_of(prefix)
        at_cap = len(prefix) >= self.max_len
        key = (history, at_cap)
        cached = self._succ_cache.get(key)
        if cached is None:
            ctx = self._pick_context(history)
            row = self.counts.get(ctx, {})
            total = self._row_totals.get(ctx, 0)
            if total == 0:
                cached = []
            else:
                symbols = [END] if at_cap else list(row)
                cached = sorted(((s, row.get(s, 0) / total) for s in symbols
                                 if row.get(s, 0) > 0),
                                key=lambda sc: (-sc[1], sc[0]))
            self._succ_cache[key] = cached
        return cached

    def _candidates(self):
        return markov_candidates(self._successors)

    def sample(self, rng):
        for _ in range(_SAMPLE_RETRIES):
            prefix = ""
            p = 1.0
            dead = False
            while True:
                succ = self._successors(prefix)
                if not succ:
                    dead = True
                    break
                key = (self._history_of(prefix), len(prefix) >= self.max_len)
                cached = self._sample_cache.get(key)
                if cached is None:
                    cumulative = []
                    acc = 0.0
                    for _s, c in succ:
                        acc += c
                        cumulative.append(acc)
                    cached = cumulative
                    self._sample_cache[key] = cached
                symbol, cond = weighted_choice(rng, cached, succ)
                p *= cond
                if symbol == END:
                    return prefix, p
                prefix += symbol
            if dead:
                continue
        raise RuntimeError("sampling failed to terminate within the length cap")

    @property
    def params(self) -> dict:
        return {"max_order": self.max_order, "threshold": self.threshold,
                "max_len": self.max_len}

    def to_state(self) -> dict:
        return {
            "max_order": self.max_order,
            "threshold": self.threshold,
            "max_len": self.max_len,
            "alphabet": self.alphabet,
            "counts": self.counts,
            "corpus_fingerprint": self.corpus_fingerprint,
            "source_label": self.source_label,
        }

    @classmethod
    def from_state(cls, state: dict) -> "BackoffModel":
        return cls(state["max_order"], state["threshold"], state["max_len"],
                   state["alphabet"], state["counts"],
                   state["corpus_fingerprint"], state["source_label"])
