"""List and Markov-family models: hand-count oracles, smoothing, serialization."""

import math
import random

import pytest

from psm_audit.corpus import PasswordCorpus
from psm_audit.errors import EmptyInputError, ModelFormatError
from psm_audit.models import (
    AdaptiveNGramModel,
    BackoffModel,
    ListModel,
    NGramModel,
    deserialize,
    serialize,
    train,
)


def corpus(counts, label="t"):
    return PasswordCorpus.from_counts(counts, label)


class TestTrainFactory:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            train("lstm", corpus({"a": 1}))

    def test_bad_params_for_kind(self):
        with pytest.raises(ValueError):
            train("list", corpus({"a": 1}), order=4)

    def test_order_below_two_rejected(self):
        with pytest.raises(ValueError):
            train("ngram", corpus({"ab": 1}), order=1)

    def test_gamma_out_of_range(self):
        with pytest.raises(ValueError):
            train("adaptive", corpus({"ab": 1}), gamma=1.5)

    def test_empty_corpus_unconstructable(self):
        with pytest.raises(EmptyInputError):
            PasswordCorpus.from_counts({}, "t")


class TestListModel:
    def test_direct_formula(self):
        m = train("list", corpus({"abc": 2, "abd": 2}))
        assert m.prob("abc") == 0.5

    def test_non_member_zero(self):
        m = train("list", corpus({"abc": 2}))
        assert m.prob("zzz") == 0.0

    def test_stream_sorted_by_frequency(self):
        m = train("list", corpus({"a": 3, "b": 1}))
        assert [(c.rank, c.password, c.prob) for c in m.enumerate_top(2)] == [
            (1, "a", 0.75), (2, "b", 0.25)]

    def test_equal_counts_lexicographic(self):
        m = train("list", corpus({"zz": 1, "aa": 1, "mm": 1}))
        assert [c.password for c in m.enumerate_top(3)] == ["aa", "mm", "zz"]


class TestNGramHandOracles:
    def test_unsmoothed_single_password(self):
        # start->a, a->b, b->end are all forced, so the product is 1.
        m = train("ngram", corpus({"ab": 1}), order=2, smoothing=0.0)
        assert m.prob("ab") == 1.0

    def test_laplace_hand_value(self):
        # Alphabet {a,b} plus end: each row denominator is count+3, each
        # needed conditional is (1+1)/(1+3) except start->a's (1+1)/(1+3).
        m = train("ngram", corpus({"ab": 1}), order=2, smoothing=1.0)
        assert m.prob("ab") == pytest.approx((2 / 4) ** 3)

    def test_empty_string_reported_not_crash(self):
        m = train("ngram", corpus({"ab": 1}), order=2, smoothing=1.0)
        assert m.prob("") == pytest.approx(1 / 4)
        m0 = train("ngram", corpus({"ab": 1}), order=2, smoothing=0.0)
        assert m0.prob("") == 0.0

    def test_outside_alphabet_zero(self):
        m = train("ngram", corpus({"ab": 1}), order=2, smoothing=1.0)
        assert m.prob("az") == 0.0
        assert m.prob("aé") == 0.0

    def test_beyond_max_len_zero(self):
        m = train("ngram", corpus({"ab": 1}), order=2, smoothing=1.0, max_len=3)
        assert m.prob("abab") == 0.0

    def test_token_probs_product_matches_prob(self):
        m = train("ngram", corpus({"ab": 3, "ba": 1, "a": 2}), order=2,
                  smoothing=0.5)
        for probe in ("ab", "ba", "aa", "b"):
            assert math.prod(m.token_probs(probe)) == pytest.approx(m.prob(probe))

    def test_every_context_row_sums_to_one(self):
        from psm_audit.models.base import END

        m = train("ngram", corpus({"abc": 3, "bca": 2, "c1": 1}), order=3,
                  smoothing=0.25)
        for ctx in m.counts:
            total = sum(m._cond(ctx, s) for s in m.alphabet + END)
            assert total == pytest.approx(1.0)
        # Unseen contexts are smoothed uniformly and still sum to one.
        total = sum(m._cond("zz", s) for s in m.alphabet + END)
        assert total == pytest.approx(1.0)


class TestAdaptiveNGram:
    def test_gamma_zero_counts_identical(self):
        c = corpus({"ab": 3, "ba": 2, "abb": 1})
        plain = NGramModel.train(c, order=2, smoothing=0.01)
        noisy = AdaptiveNGramModel.train(c, order=2, gamma=0.0, seed=3,
                                         smoothing=0.01)
        assert noisy.counts == plain.counts
        for probe in ("ab", "ba", "abb", "bb", ""):
            assert noisy.prob(probe) == plain.prob(probe)

    def test_noise_changes_counts_deterministically(self):
        c = corpus({f"pw{i}": 5 for i in range(200)})
        a = AdaptiveNGramModel.train(c, order=4, gamma=0.5, seed=1)
        b = AdaptiveNGramModel.train(c, order=4, gamma=0.5, seed=1)
        other = AdaptiveNGramModel.train(c, order=4, gamma=0.5, seed=2)
        assert a.counts == b.counts
        assert a.counts != other.counts

    def test_noise_only_inflates(self):
        c = corpus({"abc": 4, "bcd": 2})
        plain = NGramModel.train(c, order=3)
        noisy = AdaptiveNGramModel.train(c, order=3, gamma=1.0, seed=0)
        for ctx, row in plain.counts.items():
            for ch, n in row.items():
                assert noisy.counts[ctx][ch] >= n


class TestBackoff:
    def test_high_threshold_falls_back_to_unigram(self):
        c = corpus({"ab": 6, "ba": 2})
        m = BackoffModel.train(c, max_order=3, threshold=1000)
        # Only the empty context is ever chosen; conditionals are unigram
        # frequencies over 8 a's, 8 b's and 8 end marks.
        total = 24
        assert m.prob("a") == pytest.approx((8 / total) * (8 / total))

    def test_low_threshold_uses_longest_context(self):
        c = corpus({"ab": 6, "ba": 2})
        m = BackoffModel.train(c, max_order=3, threshold=1)
        # Context START+a seen 6 times, always followed by b.
        assert m.prob("ab") == pytest.approx((6 / 8) * 1.0 * 1.0)

    def test_chosen_row_sums_to_one(self):
        c = corpus({"abc": 5, "abd": 5, "xb": 3, "b": 9})
        m = BackoffModel.train(c, max_order=4, threshold=4)
        for prefix in ("", "a", "ab", "x", "b", "abc"):
            succ = m._successors(prefix)
            if succ:
                assert sum(p for _s, p in succ) == pytest.approx(1.0)

    def test_unseen_transition_zero(self):
        m = BackoffModel.train(corpus({"ab": 30}), max_order=3, threshold=1)
        assert m.prob("ba") == 0.0

    def test_empty_string_reported(self):
        m = BackoffModel.train(corpus({"ab": 30, "b": 10}), max_order=3,
                               threshold=1)
        assert 0.0 <= m.prob("") <= 1.0


class TestSerialization:
    @pytest.mark.parametrize("kind,params", [
        ("list", {}),
        ("ngram", {"order": 4, "smoothing": 0.01}),
        ("adaptive", {"order": 3, "gamma": 0.01, "seed": 5}),
        ("backoff", {"max_order": 3, "threshold": 2}),
        ("pcfg", {}),
        ("chunk_pcfg", {"vocab_size": 20}),
    ])
    def test_roundtrip_identical_probs(self, tmp_path, kind, params):
        c = corpus({"abc1": 4, "abd22": 3, "zz!9": 2, "abc": 2, "a1b2": 1})
        m = train(kind, c, **params)
        path = tmp_path / "model.psma"
        serialize(m, path)
        back = deserialize(path)
        assert back.kind == m.kind
        assert back.params == m.params
        rng = random.Random(0)
        probes = ["abc1", "abd22", "zz!9", "abc", "a1b2", "", "abcd", "unseen9"]
        probes += ["".join(rng.choice("abcdz192!") for _ in range(rng.randint(1, 6)))
                   for _ in range(100)]
        for probe in probes:
            assert back.prob(probe) == m.prob(probe)

    def test_truncated_file_decode_error(self, tmp_path):
        c = corpus({"abc": 1})
        m = train("list", c)
        path = tmp_path / "model.psma"
        serialize(m, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(ModelFormatError):
            deserialize(path)

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "bogus.psma"
        path.write_bytes(b"not a model at all")
        with pytest.raises(ModelFormatError):
            deserialize(path)

    def test_fingerprint_round_trips(self, tmp_path):
        c = corpus({"abc": 1, "bcd": 2})
        m = train("ngram", c, order=2)
        path = tmp_path / "m.psma"
        serialize(m, path)
        assert deserialize(path).corpus_fingerprint == c.fingerprint()


class TestSampling:
    def test_list_single_support(self):
        m = train("list", corpus({"a": 1}))
        rng = random.Random(0)
        assert all(m.sample(rng) == ("a", 1.0) for _ in range(5))

    def test_sample_prob_matches_prob_function(self):
        c = corpus({"mari1": 40, "tylo": 25, "an2": 10, "bo!": 5})
        for kind, params in [("ngram", {"order": 3, "smoothing": 0.01}),
                             ("backoff", {"max_order": 3, "threshold": 2}),
                             ("list", {}), ("pcfg", {})]:
            m = train(kind, c, **params)
            rng = random.Random(7)
            for _ in range(200):
                pwd, p = m.sample(rng)
                assert p == m.prob(pwd)

    def test_sampling_deterministic_under_seed(self):
        c = corpus({"marie7": 9, "lora": 3, "k1": 2})
        m = train("ngram", c, order=2, smoothing=0.1)
        draws_a = [m.sample(random.Random(99))[0] for _ in range(1)]
        draws_b = [m.sample(random.Random(99))[0] for _ in range(1)]
        assert draws_a == draws_b
