"""Trained-password stealing campaigns against a target model.

A query generator feeds candidate passwords to a membership attack; accepted
candidates can be fed back so the generator drifts toward the training
distribution. The harvest is then cut at a probability threshold chosen so
the reported precision reaches the campaign's target.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .corpus import PasswordCorpus
from .mia import ThresholdAttack
from .models.base import PasswordModel
from .transforms import (
    case_variants,
    increment_digit_run,
    leading_affix,
    leet_variants,
    split_trailing_digits,
    trailing_affix,
)


class CorpusReplay:
    """Static generator: streams the owned corpus by descending frequency."""

    kind = "corpus_replay"

    def __init__(self, corpus: PasswordCorpus, seed: int = 0):
        self._ordered = corpus.by_frequency()
        self._pos = 0
        self.seed = seed
        self.exhausted = False

    def generate(self, n: int) -> list:
        if n < 1:
            raise ValueError("n must be >= 1")
        out = self._ordered[self._pos:self._pos + n]
        self._pos += len(out)
        if len(out) < n:
            self.exhausted = True
        return out

    def accept(self, password: str) -> None:
        """Feedback is ignored: replay order is fixed."""


def mangle_variants(word: str) -> list:
    """Deterministic transformation variants in documented rule order.

    Rule order: case, leet, digit-suffix (increment, then common appends,
    then strip), affix rotation. The unmodified word is excluded; duplicates
    keep their first position.
    """
    out = []
    seen = {word}

    def add(candidate: str):
        if candidate and candidate not in seen:
            seen.add(candidate)
            out.append(candidate)

    for v in case_variants(word):
        add(v)
    for v in leet_variants(word):
        add(v)
    stem, run = split_trailing_digits(word)
    if run:
        add(stem + increment_digit_run(run))
    for suffix in ("1", "123", "12", "2", "01"):
        add(word + suffix)
    if run and stem:
        add(stem)
    lead, rest = leading_affix(word)
    if lead and rest:
        add(rest + lead)
    rest, tail = trailing_affix(word)
    if tail and rest:
        add(tail + rest)
    return out


class Mangler:
    """Rule-based generator with an accept-pool feedback loop.

    Seeds stream in order: each seed is emitted, then its variants. accept()
    queues variants of the accepted password ahead of everything else, so
    output clusters near accepted items; this preserves the dynamic-feedback
    contract without any learned generator. Deterministic given the seed list
    and the accept() call sequence.
    """

    kind = "mangler"

    def __init__(self, seeds, seed: int = 0):
        self._cold = deque(seeds)
        self._hot: deque = deque()
        self._pending: deque = deque()
        self._emitted: set = set()
        self._accepted: set = set()
        self.seed = seed
        self.exhausted = False

    def _next_candidate(self):
        while True:
            if self._hot:
                candidate = self._hot.popleft()
            elif self._pending:
                candidate = self._pending.popleft()
            elif self._cold:
                seed_word = self._cold.popleft()
                self._pending.extend(mangle_variants(seed_word))
                candidate = seed_word
            else:
                return None
            if candidate not in self._emitted:
                self._emitted.add(candidate)
                return candidate

    def generate(self, n: int) -> list:
        if n < 1:
            raise ValueError("n must be >= 1")
        out = []
        while len(out) < n:
            candidate = self._next_candidate()
            if candidate is None:
                self.exhausted = True
                break
            out.append(candidate)
        return out

    def accept(self, password: str) -> None:
        if password in self._accepted:
            return
        self._accepted.add(password)
        for v in mangle_variants(password):
            if v not in self._emitted:
                self._hot.append(v)


@dataclass
class StealReport:
    """Counters for one stealing campaign.

    predicted_members counts the final harvest after the precision cut;
    achieved_precision = true_members / predicted_members and stolen equals
    true_members, so stolen <= predicted_members always holds.
    """

    queries_issued: int
    attack_predictions: int
    predicted_members: int
    true_members: int
    achieved_precision: float
    stolen: int
    threshold: float
    target_precision: float
    no_qualifying_threshold: bool = False
    generator_exhausted: bool = False
    stolen_passwords: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "queries_issued": self.queries_issued,
            "attack_predictions": self.attack_predictions,
            "predicted_members": self.predicted_members,
            "true_members": self.true_members,
            "achieved_precision": self.achieved_precision,
            "stolen": self.stolen,
            "threshold": self.threshold,
            "target_precision": self.target_precision,
            "no_qualifying_threshold": self.no_qualifying_threshold,
            "generator_exhausted": self.generator_exhausted,
        }


def run_campaign(target_model: PasswordModel, truth, gen,
                 attack: ThresholdAttack, budget: int,
                 target_precision: float = 0.9,
                 feedback: bool = True) -> StealReport:
    """Issue up to `budget` queries, harvest predicted members, cut at precision.

    With feedback enabled, every predicted member is passed to gen.accept()
    before the next query is drawn, so feedback-aware generators redirect
    while the campaign runs. The final cut scans all distinct-probability
    prefixes of the prediction list and keeps the longest one whose member
    fraction reaches target_precision, which maximizes the stolen count.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not 0.0 < target_precision <= 1.0:
        raise ValueError("target_precision must lie in (0, 1]")
    members = set(truth.counts) if isinstance(truth, PasswordCorpus) else set(truth)

    issued = 0
    predictions = []
    while issued < budget:
        batch = gen.generate(1)
        if not batch:
            break
        pwd = batch[0]
        issued += 1
        p = target_model.prob(pwd)
        if attack.classify(p):
            predictions.append((pwd, p))
            if feedback:
                gen.accept(pwd)

    predictions.sort(key=lambda item: (-item[1], item[0]))
    best_end = 0
    hits = 0
    hits_at_best = 0
    for i, (pwd, p) in enumerate(predictions, start=1):
        hits += pwd in members
        boundary = i == len(predictions) or predictions[i][1] != p
        if boundary and hits / i >= target_precision:
            best_end = i
            hits_at_best = hits

    kept = predictions[:best_end]
    stolen = tuple(pwd for pwd, _ in kept if pwd in members)
    return StealReport(
        queries_issued=issued,
        attack_predictions=len(predictions),
        predicted_members=len(kept),
        true_members=hits_at_best,
        achieved_precision=hits_at_best / len(kept) if kept else 0.0,
        stolen=hits_at_best,
        threshold=kept[-1][1] if kept else math.inf,
        target_precision=target_precision,
        no_qualifying_threshold=best_end == 0,
        generator_exhausted=getattr(gen, "exhausted", False),
        stolen_passwords=stolen,
    )


def upper_bound(model: PasswordModel, train_members, g_list,
                universe=None) -> list:
    """Best-possible stolen fraction per G: member share of the top-G candidates.

    The optimal attacker's G best guesses are exactly the model's own top-G
    candidates, so enumeration suffices; passing an explicit finite universe
    scores and sorts it brute-force instead (used to cross-check the
    identity on tiny alphabets). Rows flag early exhaustion of the support.
    """
    g_values = list(g_list)
    if not g_values or any(g < 1 for g in g_values):
        raise ValueError("every G must be >= 1")
    members = (set(train_members.counts) if isinstance(train_members, PasswordCorpus)
               else set(train_members))
    g_max = max(g_values)
    if universe is not None:
        scored = sorted(
            ((model.prob(pwd), pwd) for pwd in universe if model.prob(pwd) > 0.0),
            key=lambda pp: (-pp[0], pp[1]))
        ordered = [pwd for _p, pwd in scored[:g_max]]
    else:
        ordered = [c.password for c in model.enumerate_top(g_max)]
    member_cum = []
    hits = 0
    for pwd in ordered:
        hits += pwd in members
        member_cum.append(hits)
    rows = []
    for g in g_values:
        used = min(g, len(member_cum))
        fraction = member_cum[used - 1] / used if used else 0.0
        rows.append({"g": g, "fraction": fraction, "emitted": used,
                     "truncated": used < g})
    return rows


def frequency_breakdown(stolen, truth_corpus: PasswordCorpus, intervals,
                        members=None) -> dict:
    """Bucket stolen passwords by their frequency in the reference corpus.

    intervals are disjoint ascending (low, high] count ranges; a stolen
    password lands in the bucket covering its count in truth_corpus (0 when
    absent). Per bucket the member share is reported, members defaulting to
    the reference corpus support. Empty buckets are omitted rather than
    reported as 0/0.
    """
    ivs = [(float(lo), float(hi)) for lo, hi in intervals]
    if any(lo >= hi for lo, hi in ivs):
        raise ValueError("each interval needs low < high")
    for (_, hi), (lo, _) in zip(ivs, ivs[1:]):
        if lo < hi:
            raise ValueError("intervals must be disjoint and ascending")
    member_set = set(members) if members is not None else set(truth_corpus.counts)
    buckets: dict = {}
    for pwd in stolen:
        freq = truth_corpus.counts.get(pwd, 0)
        for lo, hi in ivs:
            if lo < freq <= hi:
                n, m = buckets.get((lo, hi), (0, 0))
                buckets[(lo, hi)] = (n + 1, m + (pwd in member_set))
                break
    return {
        interval: {"count": n, "member_share": m / n}
        for interval, (n, m) in buckets.items()
    }
