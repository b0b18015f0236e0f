"""Membership inference against trained password models.

Three attack routes: a probability threshold calibrated on a shadow model at
an expected member ratio, a no-shadow baseline that flags the top k percent
of queries, and a linear classifier over probability features. A prediction
is always a pure function of the target model's estimated probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import PasswordCorpus, SplitPair
from .errors import ProvenanceError
from .models.base import PasswordModel

# Probabilities are clamped here before taking logs so that unseen passwords
# (prob 0) yield a finite, well-separated feature value.
_PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class LabeledSample:
    """A shadow-model query result with its ground-truth member flag."""

    password: str
    prob: float
    internal_probs: tuple
    member: bool


def build_labeled(shadow_model: PasswordModel, split: SplitPair) -> list:
    """Query the shadow model with both halves and label by train membership.

    The shadow model must have been trained on split.train_half (checked via
    corpus fingerprint). Output is sorted by descending probability, ties
    lexicographic.
    """
    expected = split.train_half.fingerprint()
    actual = getattr(shadow_model, "corpus_fingerprint", "")
    if actual != expected:
        raise ProvenanceError(
            f"shadow model fingerprint {actual!r} does not match the split's "
            f"train half {expected!r}")
    samples = []
    for pwd in set(split.train_half.counts) | set(split.test_half.counts):
        samples.append(LabeledSample(
            password=pwd,
            prob=shadow_model.prob(pwd),
            internal_probs=tuple(shadow_model.token_probs(pwd)),
            member=pwd in split.train_half.counts,
        ))
    samples.sort(key=lambda s: (-s.prob, s.password))
    return samples


@dataclass(frozen=True)
class ThresholdAttack:
    """Classify member iff the target's probability reaches delta.

    Zero-probability queries are never members: they lie outside the model's
    candidate space, so a delta of 0 flags exactly the support.
    """

    delta: float
    expected_member_ratio: float
    provenance: str = ""
    fallback: bool = False

    def classify(self, prob: float) -> bool:
        return prob >= self.delta and prob > 0.0

    def apply(self, target_model: PasswordModel, passwords) -> dict:
        return {pwd: self.classify(target_model.prob(pwd))
                for pwd in sorted(set(passwords))}


def select_threshold(labeled, ratio: float) -> ThresholdAttack:
    """Pick the probability threshold matching an expected member ratio.

    Scans prefixes of the probability-sorted labeled list and takes the
    longest prefix whose member fraction still reaches `ratio`; delta is the
    probability of that prefix's last sample. If no prefix qualifies the
    first sample's probability is used and the attack is flagged as a
    fallback.
    """
    if not 0.5 < ratio <= 1.0:
        raise ValueError("expected member ratio must lie in (0.5, 1]")
    samples = list(labeled)
    if not samples:
        raise ValueError("labeled sample list is empty")
    members = 0
    best_end = 0
    for i, sample in enumerate(samples, start=1):
        members += sample.member
        if members / i >= ratio:
            best_end = i
    if best_end == 0:
        return ThresholdAttack(samples[0].prob, ratio, fallback=True)
    return ThresholdAttack(samples[best_end - 1].prob, ratio)


def attack_threshold(target_model: PasswordModel, queries, delta: float) -> dict:
    """Threshold predictions over a query set; deterministic and per-password pure."""
    if isinstance(queries, PasswordCorpus):
        queries = queries.counts
    attack = ThresholdAttack(delta, expected_member_ratio=1.0)
    return attack.apply(target_model, queries)


def attack_top_percent(target_model: PasswordModel, queries,
                       k_percent: float = 10.0) -> dict:
    """No-shadow baseline: flag the top k% of queries by target probability.

    The member count is ceil(k% of queries); ties in probability are broken
    lexicographically so the prediction set is reproducible.
    """
    if not 0.0 < k_percent < 100.0:
        raise ValueError("k_percent must lie strictly between 0 and 100")
    if isinstance(queries, PasswordCorpus):
        queries = queries.counts
    uniques = sorted(set(queries))
    if not uniques:
        raise ValueError("query set is empty")
    ranked = sorted(uniques, key=lambda p: (-target_model.prob(p), p))
    n_member = math.ceil(len(ranked) * k_percent / 100.0)
    flagged = set(ranked[:n_member])
    return {pwd: pwd in flagged for pwd in uniques}


FEATURE_SCHEMES = ("whole", "internal", "joint")


def featurize(sample: LabeledSample, scheme: str) -> tuple:
    """Fixed-length feature vector for one sample; returns (vector, degenerate).

    whole:    [log p]
    internal: [min, max, mean of internal log-probs,
               negated geometric mean of their magnitudes, token count]
    joint:    concatenation of both.

    An empty internal list yields a zero vector with the degenerate flag set.
    """
    if scheme not in FEATURE_SCHEMES:
        raise ValueError(f"unknown feature scheme {scheme!r}")
    whole = [math.log(max(sample.prob, _PROB_FLOOR))]
    logs = [math.log(max(p, _PROB_FLOOR)) for p in sample.internal_probs]
    if logs:
        geo = -math.exp(sum(math.log(max(-v, _PROB_FLOOR)) for v in logs) / len(logs))
        internal = [min(logs), max(logs), sum(logs) / len(logs), geo,
                    float(len(logs))]
        degenerate = False
    else:
        internal = [0.0] * 5
        degenerate = True
    if scheme == "whole":
        return np.array(whole), False
    if scheme == "internal":
        return np.array(internal), degenerate
    return np.array(whole + internal), degenerate


@dataclass
class ClassifierAttack:
    """Logistic-style linear classifier over probability features."""

    scheme: str
    weights: np.ndarray
    bias: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    metadata: dict = field(default_factory=dict)

    def decision(self, features: np.ndarray) -> np.ndarray:
        x = (np.atleast_2d(features) - self.feature_mean) / self.feature_std
        return x @ self.weights + self.bias

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        return self.decision(features) >= 0.0

    def classify(self, sample: LabeledSample) -> bool:
        vec, _ = featurize(sample, self.scheme)
        return bool(self.predict_features(vec)[0])


def train_classifier(labeled, scheme: str = "joint", epochs: int = 400,
                     lr: float = 0.5, seed: int = 0) -> ClassifierAttack:
    """Fit the linear classifier by full-batch gradient descent.

    Fixed epochs, zero initialization and standardized features make training
    deterministic; the seed is recorded for provenance. Both classes must be
    present.
    """
    samples = list(labeled)
    vectors = []
    labels = []
    for s in samples:
        vec, _ = featurize(s, scheme)
        vectors.append(vec)
        labels.append(s.member)
    x = np.vstack(vectors)
    y = np.array(labels, dtype=np.float64)
    if y.min() == y.max():
        raise ValueError("training data contains a single class")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0.0] = 1.0
    xs = (x - mean) / std
    w = np.zeros(xs.shape[1])
    b = 0.0
    n = len(y)
    for _ in range(epochs):
        z = xs @ w + b
        pred = 1.0 / (1.0 + np.exp(-z))
        grad = pred - y
        w -= lr * (xs.T @ grad) / n
        b -= lr * grad.mean()
    return ClassifierAttack(scheme, w, b, mean, std,
                            metadata={"epochs": epochs, "lr": lr, "seed": seed})


@dataclass
class AttackReport:
    """Confusion counts with exactly recomputable precision/recall/F1."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def precision_defined(self) -> bool:
        return self.tp + self.fp > 0

    @property
    def precision(self) -> float:
        if not self.precision_defined:
            return 0.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        if self.tp + self.fn == 0:
            return 0.0
        return self.tp / (self.tp + self.fn)

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        if denom == 0:
            return 0.0
        return 2 * self.tp / denom

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": self.precision,
            "precision_defined": self.precision_defined,
            "recall": self.recall,
            "f1": self.f1,
        }


def evaluate(predictions: dict, truth_members) -> AttackReport:
    """Score predictions against the true member set (queries ∩ training set)."""
    members = set(truth_members)
    tp = fp = tn = fn = 0
    for pwd, predicted in predictions.items():
        actual = pwd in members
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return AttackReport(tp, fp, tn, fn)
