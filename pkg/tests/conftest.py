"""Shared fixtures: synthetic corpora shaped like real password dumps.

The generator mixes pronounceable base words with digit/symbol suffixes under
zipf-like popularity, which is enough structure for over-learning, threshold
transfer and estimator-fidelity effects to show at desk scale.
"""

from __future__ import annotations

import bisect
import itertools
import random

import pytest

from psm_audit.corpus import PasswordCorpus

_SYLLABLES = [
    "ma", "ri", "lo", "ve", "an", "na", "ko", "ta", "su", "mi",
    "ra", "jo", "ne", "el", "li", "da", "so", "ba", "ki", "to",
    "pa", "se", "mo", "ca", "ru", "le", "ni", "ha", "ga", "de",
]

_SUFFIXES = [
    "1", "123", "12", "2", "7", "11", "01", "22", "123456", "2020",
    "2021", "69", "88", "99", "00", "13", "21", "07", "10", "77",
    "3", "5", "111", "666", "2019", "08", "09", "321", "1234", "4",
]

_SPECIALS = "!@#$*"


def _zipf_cumulative(n: int, exponent: float) -> list:
    acc = 0.0
    out = []
    for k in range(1, n + 1):
        acc += 1.0 / k ** exponent
        out.append(acc)
    return out


def _zipf_index(rng: random.Random, cumulative: list) -> int:
    x = rng.random() * cumulative[-1]
    return min(bisect.bisect_right(cumulative, x), len(cumulative) - 1)


def make_words(n: int, rng: random.Random) -> list:
    words = []
    seen = set()
    while len(words) < n:
        k = rng.choice((2, 2, 3, 3, 4))
        w = "".join(rng.choice(_SYLLABLES) for _ in range(k))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def synth_corpus(n_total: int, seed: int, n_words: int = 800,
                 label: str = "synthetic") -> PasswordCorpus:
    """Draw n_total password occurrences from a fixed generative recipe."""
    rng = random.Random(seed)
    words = make_words(n_words, rng)
    word_cum = _zipf_cumulative(len(words), 1.05)
    suffix_cum = _zipf_cumulative(len(_SUFFIXES), 1.2)
    counts: dict = {}
    for _ in range(n_total):
        w = words[_zipf_index(rng, word_cum)]
        r = rng.random()
        if r < 0.25:
            pwd = w
        elif r < 0.65:
            pwd = w + _SUFFIXES[_zipf_index(rng, suffix_cum)]
        elif r < 0.75:
            pwd = w.capitalize() + _SUFFIXES[_zipf_index(rng, suffix_cum)]
        elif r < 0.85:
            pwd = w + words[_zipf_index(rng, word_cum)]
        else:
            pwd = w + rng.choice(_SPECIALS) + _SUFFIXES[_zipf_index(rng, suffix_cum)]
        counts[pwd] = counts.get(pwd, 0) + 1
    return PasswordCorpus(counts, n_total, label)


def tiny_universe(alphabet: str = "abc12!", max_len: int = 3) -> list:
    """Every string over `alphabet` up to max_len, empty string included."""
    out = [""]
    for length in range(1, max_len + 1):
        out.extend("".join(t) for t in itertools.product(alphabet, repeat=length))
    return out


@pytest.fixture(scope="session")
def corpus_10k() -> PasswordCorpus:
    return synth_corpus(10_000, seed=11)


@pytest.fixture(scope="session")
def corpus_100k() -> PasswordCorpus:
    return synth_corpus(100_000, seed=7, n_words=1500)


# -- acceptance reporting ------------------------------------------------------

_acceptance_results: list = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" in report.nodeid:
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
