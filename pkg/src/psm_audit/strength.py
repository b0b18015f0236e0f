"""Probability-to-guess-number conversion, strength rating and over-learning metrics."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .corpus import PasswordCorpus
from .models.base import PasswordModel

DEFAULT_ESTIMATOR_SAMPLES = 100_000
DEFAULT_BUCKET_THRESHOLDS = (1e6, 1e14)


class MonteCarloEstimator:
    """Importance-sampling estimator mapping a probability to a guess number.

    Built from N passwords sampled from the model itself. The guess number of
    probability p is one plus the estimated count of candidates with larger
    probability, where each sample contributes weight 1 / (N * p_sample).
    Estimates are monotone non-increasing in p by construction.
    """

    def __init__(self, sample_probs, n: int, model_fingerprint: str, seed: int):
        probs = np.sort(np.asarray(sample_probs, dtype=np.float64))
        weights = 1.0 / (n * probs)
        # suffix[i] = total weight of samples with prob >= probs[i]
        suffix = np.concatenate([np.cumsum(weights[::-1])[::-1], [0.0]])
        self._probs = probs
        self._suffix = suffix
        self.n = n
        self.model_fingerprint = model_fingerprint
        self.seed = seed

    def guess_number(self, p: float) -> float:
        """Estimated rank for probability p; p = 0 maps to +inf (documented sentinel)."""
        if p <= 0.0:
            return math.inf
        idx = int(np.searchsorted(self._probs, p, side="right"))
        return 1.0 + float(self._suffix[idx])

    def guess_numbers(self, probs) -> np.ndarray:
        arr = np.asarray(probs, dtype=np.float64)
        out = np.full(arr.shape, np.inf)
        pos = arr > 0.0
        idx = np.searchsorted(self._probs, arr[pos], side="right")
        out[pos] = 1.0 + self._suffix[idx]
        return out


def build_estimator(model: PasswordModel, n: int = DEFAULT_ESTIMATOR_SAMPLES,
                    seed: int = 0) -> MonteCarloEstimator:
    """Sample n passwords from the model and freeze their probabilities.

    Requires a normalized model (all in-scope kinds sample ancestrally from
    their own distribution). n below 1000 gives useless estimates and is
    rejected.
    """
    if n < 1000:
        raise ValueError("estimator needs at least 1000 samples")
    rng = random.Random(seed)
    probs = [model.sample(rng)[1] for _ in range(n)]
    return MonteCarloEstimator(probs, n, getattr(model, "corpus_fingerprint", ""), seed)


@dataclass
class StrengthRating:
    guess_number: float
    bucket: str
    thresholds: tuple


def rate_strength(guess_number: float,
                  thresholds: tuple = DEFAULT_BUCKET_THRESHOLDS) -> StrengthRating:
    """Quantize a guess number into Weak / Medium / Strong."""
    low, high = thresholds
    if not low < high:
        raise ValueError("thresholds must be ascending")
    if guess_number < low:
        bucket = "Weak"
    elif guess_number < high:
        bucket = "Medium"
    else:
        bucket = "Strong"
    return StrengthRating(guess_number, bucket, (low, high))


@dataclass
class FitReport:
    """Member fraction of the model's top-G candidates, per requested G."""

    g_values: tuple
    fractions: tuple
    emitted: int
    truncated: bool

    def rows(self) -> list:
        return [(g, f) for g, f in zip(self.g_values, self.fractions)]


def fit_g(model: PasswordModel, train_corpus: PasswordCorpus,
          g_list) -> FitReport:
    """Fraction of the top-G enumerated candidates present in the training corpus.

    Enumerates once up to max(g_list). If the model's support runs out before
    some G, that entry is computed over the emitted count and the report is
    flagged as truncated.
    """
    g_values = tuple(g_list)
    if not g_values or any(g < 1 for g in g_values):
        raise ValueError("every G must be >= 1")
    g_max = max(g_values)
    member_cum = []
    members = 0
    for cand in model.enumerate_top(g_max):
        members += cand.password in train_corpus
        member_cum.append(members)
    emitted = len(member_cum)
    fractions = []
    for g in g_values:
        used = min(g, emitted)
        fractions.append(member_cum[used - 1] / used if used else 0.0)
    return FitReport(g_values, tuple(fractions), emitted, emitted < g_max)


def weighted_spearman(meter_order, reference_order) -> float:
    """Rank correlation weighted toward the head of the reference ranking.

    Both arguments are full orderings of the same password set; item i gets
    weight 1 / reference_rank_i, so disagreement about the weakest passwords
    (rank 1 being weakest/most probable) costs the most. The weighting is
    asymmetric: exchanging the arguments changes the weights.
    """
    meter = list(meter_order)
    reference = list(reference_order)
    if len(meter) != len(reference) or set(meter) != set(reference):
        raise ValueError("rankings must cover the same password set")
    if len(meter) < 2:
        raise ValueError("need at least 2 items to correlate")
    meter_rank = {pwd: i + 1 for i, pwd in enumerate(meter)}
    r = np.arange(1, len(reference) + 1, dtype=np.float64)
    m = np.array([meter_rank[pwd] for pwd in reference], dtype=np.float64)
    w = 1.0 / r
    w /= w.sum()
    mr = np.sum(w * r)
    mm = np.sum(w * m)
    cov = np.sum(w * (r - mr) * (m - mm))
    var_r = np.sum(w * (r - mr) ** 2)
    var_m = np.sum(w * (m - mm) ** 2)
    if var_r == 0.0 or var_m == 0.0:
        raise ValueError("degenerate ranking with zero variance")
    return float(cov / math.sqrt(var_r * var_m))


def scatter_data(model: PasswordModel, estimator: MonteCarloEstimator,
                 member_set, probe_set, guess_cap: float = math.inf) -> list:
    """(guess_number, is_member) rows for the over-learning scatter plot.

    Probes whose estimated guess number exceeds guess_cap are dropped, which
    matches how the plot is bounded.
    """
    members = set(member_set)
    rows = []
    for pwd in probe_set:
        gn = estimator.guess_number(model.prob(pwd))
        if gn <= guess_cap:
            rows.append((gn, pwd in members))
    return rows


def write_scatter_csv(rows, path) -> None:
    from .reporting import write_csv

    write_csv(path, ("guess_number", "is_member"),
              [(gn, int(flag)) for gn, flag in rows])
