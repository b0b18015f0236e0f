"""Template-grammar model over letter/digit/symbol segments.

A password is parsed into maximal runs of one character class; the run-class
sequence is the template. Probability factors as the template probability
times one terminal probability per segment, and both the template table and
every terminal table sum to one by construction.
"""

from __future__ import annotations

from ..corpus import PasswordCorpus
from .base import PasswordModel, template_candidates, weighted_choice


def _char_class(ch: str) -> str:
    if ch.isascii() and ch.isalpha():
        return "L"
    if ch.isdigit():
        return "D"
    return "S"


def parse_segments(password: str) -> list:
    """Split into maximal same-class runs: [(class, segment)]."""
    segments = []
    for ch in password:
        cls = _char_class(ch)
        if segments and segments[-1][0] == cls:
            segments[-1][1].append(ch)
        else:
            segments.append([cls, [ch]])
    return [(cls, "".join(chars)) for cls, chars in segments]


def template_of(password: str) -> tuple:
    return tuple((cls, len(seg)) for cls, seg in parse_segments(password))


class PcfgModel(PasswordModel):
    kind = "pcfg"

    def __init__(self, template_counts: dict, terminal_counts: dict,
                 corpus_fingerprint: str = "", source_label: str = ""):
        self.template_counts = template_counts
        self.terminal_counts = terminal_counts
        self.corpus_fingerprint = corpus_fingerprint
        self.source_label = source_label
        self._template_total = sum(template_counts.values())
        self._terminal_totals = {key: sum(tbl.values())
                                 for key, tbl in terminal_counts.items()}
        self._enum_cache = None
        self._sample_cache = None

    @classmethod
    def train(cls, corpus: PasswordCorpus) -> "PcfgModel":
        template_counts: dict = {}
        terminal_counts: dict = {}
        for pwd, c in corpus.counts.items():
            segments = parse_segments(pwd)
            template = tuple((s_cls, len(seg)) for s_cls, seg in segments)
            template_counts[template] = template_counts.get(template, 0) + c
            for (s_cls, seg) in segments:
                table = terminal_counts.setdefault((s_cls, len(seg)), {})
                table[seg] = table.get(seg, 0) + c
        return cls(template_counts, terminal_counts,
                   corpus.fingerprint(), corpus.source_label)

    # -- queries ------------------------------------------------------------

    def _parse(self, password: str):
        segments = parse_segments(password)
        template = tuple((s_cls, len(seg)) for s_cls, seg in segments)
        return template, [seg for _cls, seg in segments]

    def template_prob(self, template: tuple) -> float:
        if self._template_total == 0:
            return 0.0
        return self.template_counts.get(template, 0) / self._template_total

    def terminal_prob(self, key: tuple, segment: str) -> float:
        total = self._terminal_totals.get(key, 0)
        if total == 0:
            return 0.0
        return self.terminal_counts[key].get(segment, 0) / total

    def token_probs(self, password: str) -> list:
        if not password:
            return [0.0]
        template, segments = self._parse(password)
        out = [self.template_prob(template)]
        for key, seg in zip(template, segments):
            out.append(self.terminal_prob(key, seg))
        return out

    def prob(self, password: str) -> float:
        if not password:
            return 0.0
        template, segments = self._parse(password)
        p = self.template_prob(template)
        for key, seg in zip(template, segments):
            if p == 0.0:
                return 0.0
            p *= self.terminal_prob(key, seg)
        return p

    # -- enumeration and sampling --------------------------------------------

    def _enum_tables(self):
        if self._enum_cache is None:
            templates = sorted(
                ((tmpl, cnt / self._template_total)
                 for tmpl, cnt in self.template_counts.items()),
                key=lambda tp: (-tp[1], tp[0]))
            tables = {}
            for key, tbl in self.terminal_counts.items():
                total = self._terminal_totals[key]
                tables[key] = sorted(((seg, cnt / total) for seg, cnt in tbl.items()),
                                     key=lambda sp: (-sp[1], sp[0]))
            self._enum_cache = (templates, tables)
        return self._enum_cache

    def _canonical(self, password: str, segments: tuple) -> bool:
        return True

    def _candidates(self):
        templates, tables = self._enum_tables()
        return template_candidates(templates, tables, canonical=self._canonical)

    def sample(self, rng):
        if self._sample_cache is None:
            templates, tables = self._enum_tables()
            def cum(pairs):
                acc, out = 0.0, []
                for _item, p in pairs:
                    acc += p
                    out.append(acc)
                return out
            self._sample_cache = (
                templates, cum(templates),
                {key: (pairs, cum(pairs)) for key, pairs in tables.items()})
        templates, tmpl_cum, tables = self._sample_cache
        for _ in range(1000):
            template, t_prob = weighted_choice(rng, tmpl_cum, templates)
            p = t_prob
            parts = []
            for key in template:
                pairs, c = tables[key]
                seg, seg_prob = weighted_choice(rng, c, pairs)
                p *= seg_prob
                parts.append(seg)
            password = "".join(parts)
            segments = tuple(parts)
            if self._canonical(password, segments):
                return password, p
        raise RuntimeError("sampling failed to draw a canonical derivation")

    # -- serialization ------------------------------------------------------

    @property
    def params(self) -> dict:
        return {}

    def to_state(self) -> dict:
        return {
            "template_counts": self.template_counts,
            "terminal_counts": self.terminal_counts,
            "corpus_fingerprint": self.corpus_fingerprint,
            "source_label": self.source_label,
        }

    @classmethod
    def from_state(cls, state: dict) -> "PcfgModel":
        return cls(state["template_counts"], state["terminal_counts"],
                   state["corpus_fingerprint"], state["source_label"])
