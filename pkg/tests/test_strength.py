"""Guess-number estimation, strength buckets, fit-G and weighted rank correlation."""

import math
import random
from fractions import Fraction

import pytest

from psm_audit.corpus import PasswordCorpus
from psm_audit.models import train
from psm_audit.strength import (
    MonteCarloEstimator,
    build_estimator,
    fit_g,
    rate_strength,
    scatter_data,
    weighted_spearman,
)


def corpus(counts):
    return PasswordCorpus.from_counts(counts, "t")


class TestEstimator:
    def test_single_support_maps_to_one(self):
        m = train("list", corpus({"a": 1}))
        est = build_estimator(m, n=1000, seed=0)
        assert est.guess_number(1.0) == 1.0

    def test_boundaries(self):
        est = MonteCarloEstimator([0.5, 0.25, 0.125, 0.125], n=4,
                                  model_fingerprint="x", seed=0)
        assert est.guess_number(0.9) == 1.0
        assert est.guess_number(0.5) == 1.0          # strictly-greater rule
        assert est.guess_number(0.0) == math.inf

    def test_hand_weighted_count(self):
        # Samples 0.5 and 0.25 with n=2: querying p=0.2 counts both, each
        # weighted 1/(n*p_i) -> 1 + 1 + 2 = 4.
        est = MonteCarloEstimator([0.5, 0.25], n=2, model_fingerprint="x", seed=0)
        assert est.guess_number(0.2) == pytest.approx(1 + 1 / (2 * 0.5) + 1 / (2 * 0.25))

    def test_minimum_sample_size_enforced(self):
        m = train("list", corpus({"a": 1}))
        with pytest.raises(ValueError):
            build_estimator(m, n=10)

    def test_monotone_in_probability(self):
        m = train("ngram", corpus({"marlo1": 5, "tik2": 4, "ra!": 2}), order=3)
        est = build_estimator(m, n=2000, seed=1)
        rng = random.Random(2)
        for _ in range(300):
            p1, p2 = sorted((rng.random(), rng.random()))
            assert est.guess_number(p1) >= est.guess_number(p2)

    def test_deterministic_under_seed(self):
        m = train("ngram", corpus({"marlo1": 5, "tik2": 4}), order=2)
        a = build_estimator(m, n=1500, seed=9)
        b = build_estimator(m, n=1500, seed=9)
        assert (a._probs == b._probs).all()

    def test_list_model_recovers_frequency_ranks(self):
        m = train("list", corpus({"a": 4, "b": 2, "c": 2, "d": 1}))
        est = build_estimator(m, n=20_000, seed=4)
        true_ranks = {"a": 1, "b": 2, "c": 3, "d": 4}
        for pwd, rank in true_ranks.items():
            assert abs(est.guess_number(m.prob(pwd)) - rank) <= 1.0

    def test_top_candidate_rank_estimate(self, corpus_10k):
        m = train("ngram", corpus_10k, order=4)
        est = build_estimator(m, n=10_000, seed=5)
        top = next(iter(m.enumerate_top(1)))
        assert 1.0 <= est.guess_number(top.prob) <= 10.0

    def test_vectorized_matches_scalar(self):
        est = MonteCarloEstimator([0.5, 0.25, 0.1], n=3, model_fingerprint="x",
                                  seed=0)
        probes = [0.0, 0.05, 0.1, 0.3, 0.9]
        vec = est.guess_numbers(probes)
        for p, v in zip(probes, vec):
            assert v == est.guess_number(p)


class TestRateStrength:
    def test_buckets(self):
        assert rate_strength(10.0).bucket == "Weak"
        assert rate_strength(1e6).bucket == "Medium"
        assert rate_strength(1e14).bucket == "Strong"

    def test_bucket_is_pure_function_of_thresholds(self):
        r = rate_strength(500.0, thresholds=(100.0, 1000.0))
        assert r.bucket == "Medium" and r.thresholds == (100.0, 1000.0)

    def test_bad_thresholds(self):
        with pytest.raises(ValueError):
            rate_strength(1.0, thresholds=(10.0, 10.0))


class TestFitG:
    def test_list_model_always_one(self):
        c = corpus({"a": 5, "b": 3, "c": 1})
        m = train("list", c)
        report = fit_g(m, c, [1, 2, 3])
        assert report.fractions == (1.0, 1.0, 1.0)

    def test_truncation_flagged(self):
        c = corpus({"a": 5, "b": 3})
        m = train("list", c)
        report = fit_g(m, c, [10])
        assert report.truncated and report.emitted == 2
        assert report.fractions == (1.0,)

    def test_higher_order_fits_training_data_harder(self, corpus_10k):
        m4 = train("ngram", corpus_10k, order=4)
        m8 = train("ngram", corpus_10k, order=8)
        f4 = fit_g(m4, corpus_10k, [300])
        f8 = fit_g(m8, corpus_10k, [300])
        assert f8.fractions[0] > f4.fractions[0]

    def test_deterministic(self, corpus_10k):
        m = train("ngram", corpus_10k, order=4)
        assert fit_g(m, corpus_10k, [200]) == fit_g(m, corpus_10k, [200])

    def test_invalid_g(self):
        m = train("list", corpus({"a": 1}))
        with pytest.raises(ValueError):
            fit_g(m, corpus({"a": 1}), [0])


class TestWeightedSpearman:
    def test_identical_is_one(self):
        order = [f"p{i}" for i in range(20)]
        assert weighted_spearman(order, list(order)) == pytest.approx(1.0, abs=1e-9)

    def test_reversed_is_negative(self):
        order = [f"p{i}" for i in range(20)]
        assert weighted_spearman(list(reversed(order)), order) < 0.0

    def test_hand_computed_single_swap(self):
        # Independent oracle: the documented formula evaluated in exact
        # rational arithmetic for reference [A..E] vs meter [A,B,C,E,D].
        reference = ["A", "B", "C", "D", "E"]
        meter = ["A", "B", "C", "E", "D"]
        m_rank = {p: i + 1 for i, p in enumerate(meter)}
        r = [Fraction(i + 1) for i in range(5)]
        m = [Fraction(m_rank[p]) for p in reference]
        w = [Fraction(1, i + 1) for i in range(5)]
        total = sum(w)
        w = [x / total for x in w]
        mean_r = sum(wi * ri for wi, ri in zip(w, r))
        mean_m = sum(wi * mi for wi, mi in zip(w, m))
        cov = sum(wi * (ri - mean_r) * (mi - mean_m) for wi, ri, mi in zip(w, r, m))
        var_r = sum(wi * (ri - mean_r) ** 2 for wi, ri in zip(w, r))
        var_m = sum(wi * (mi - mean_m) ** 2 for wi, mi in zip(w, m))
        expected = float(cov) / math.sqrt(float(var_r) * float(var_m))
        assert weighted_spearman(meter, reference) == pytest.approx(expected, abs=1e-12)
        assert 0.9 < expected < 1.0

    def test_mismatched_sets_rejected(self):
        with pytest.raises(ValueError):
            weighted_spearman(["a", "b"], ["a", "c"])

    def test_weighting_is_asymmetric(self):
        # A 3-cycle permutation: weights follow the reference argument, so
        # exchanging arguments changes the value (an involution would not).
        reference = ["a", "b", "c", "d", "e", "f"]
        meter = ["c", "a", "b", "d", "e", "f"]
        forward = weighted_spearman(meter, reference)
        backward = weighted_spearman(reference, meter)
        assert abs(forward - backward) > 0.01


class TestScatterData:
    def test_rows_and_flags(self):
        c = corpus({"a": 4, "b": 2, "c": 1})
        m = train("list", c)
        est = build_estimator(m, n=2000, seed=0)
        members = {"a", "b"}
        probes = ["a", "b", "c", "zz"]
        rows = scatter_data(m, est, members, probes)
        # "zz" has prob 0 -> infinite guess number -> outside any finite cap,
        # but the default cap is inf so the row count is 4.
        assert len(rows) == 4
        flags = [f for _g, f in rows]
        assert flags == [True, True, False, False]

    def test_mixed_100_probe_fixture(self):
        pwd_counts = {f"m{i}": 2 for i in range(50)}
        pwd_counts.update({f"n{i}": 1 for i in range(50)})
        c = corpus(pwd_counts)
        m = train("list", c)
        est = build_estimator(m, n=2000, seed=1)
        members = {p for p in pwd_counts if p.startswith("m")}
        probes = sorted(pwd_counts)
        rows = scatter_data(m, est, members, probes, guess_cap=1e9)
        assert len(rows) == 100
        # Independent membership recheck.
        for (gn, flag), pwd in zip(rows, probes):
            assert flag == pwd.startswith("m")

    def test_empty_probes(self):
        c = corpus({"a": 1})
        m = train("list", c)
        est = build_estimator(m, n=1000, seed=0)
        assert scatter_data(m, est, {"a"}, []) == []

    def test_cap_filters(self):
        c = corpus({"a": 9, "b": 1})
        m = train("list", c)
        est = build_estimator(m, n=5000, seed=0)
        rows = scatter_data(m, est, {"a"}, ["a", "b"], guess_cap=1.5)
        assert len(rows) == 1 and rows[0][1] is True

    def test_csv_header(self, tmp_path):
        from psm_audit.strength import write_scatter_csv

        path = tmp_path / "scatter.csv"
        write_scatter_csv([(1.0, True), (7.5, False)], path)
        lines = path.read_text().splitlines()
        assert lines[0] == "guess_number,is_member"
        assert lines[1:] == ["1.0,1", "7.5,0"]
