"""Correlation statistics and the similarity-vs-distance experiment."""

from __future__ import annotations

import random

import pytest
import scipy.stats

from proofrank import (
    Corpus,
    DegenerateInput,
    average_ranks,
    correlation_experiment,
    distance_histogram,
    pearson,
    spearman,
    split_tactics,
)
from proofrank.analysis import Bm25PairScorer, JaccardPairScorer

from corpus_cases import make_record, synthetic_records


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInput):
            pearson([1, 1, 1], [1, 2, 3])

    def test_short_input_rejected(self):
        with pytest.raises(DegenerateInput):
            pearson([1.0], [2.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DegenerateInput):
            pearson([1, 2], [1, 2, 3])

    def test_matches_reference_implementation(self):
        rng = random.Random(1)
        for _ in range(300):
            n = rng.randrange(5, 40)
            xs = [rng.uniform(-5, 5) for _ in range(n)]
            ys = [rng.uniform(-5, 5) for _ in range(n)]
            expected = scipy.stats.pearsonr(xs, ys).statistic
            assert pearson(xs, ys) == pytest.approx(expected, abs=1e-12)

    def test_affine_invariance(self):
        rng = random.Random(2)
        xs = [rng.random() for _ in range(50)]
        ys = [rng.random() for _ in range(50)]
        base = pearson(xs, ys)
        scaled = pearson([3.5 * x + 11 for x in xs], [0.25 * y - 7 for y in ys])
        assert scaled == pytest.approx(base, abs=1e-12)

    def test_permutation_invariance(self):
        rng = random.Random(3)
        data = [(rng.random(), rng.random()) for _ in range(200)]
        xs, ys = zip(*data)
        base = pearson(xs, ys)
        shuffled = list(data)
        rng.shuffle(shuffled)
        sx, sy = zip(*shuffled)
        assert pearson(sx, sy) == base


class TestAverageRanks:
    def test_no_ties(self):
        assert average_ranks([10.0, 30.0, 20.0]) == [1.0, 3.0, 2.0]

    def test_ties_get_mean_rank(self):
        assert average_ranks([5.0, 1.0, 5.0]) == [2.5, 1.0, 2.5]

    def test_all_equal(self):
        assert average_ranks([7.0, 7.0, 7.0, 7.0]) == [2.5, 2.5, 2.5, 2.5]

    def test_matches_reference(self):
        rng = random.Random(4)
        for _ in range(100):
            values = [rng.choice([1, 2, 3, 4, 5]) / 2 for _ in range(20)]
            expected = list(scipy.stats.rankdata(values))
            assert average_ranks(values) == pytest.approx(expected)


class TestSpearman:
    def test_monotone_transform_is_one(self):
        xs = [1.0, 4.0, 2.0, 8.0, 5.0]
        ys = [x**3 + 1 for x in xs]
        assert spearman(xs, ys) == pytest.approx(1.0)

    def test_all_equal_rejected(self):
        with pytest.raises(DegenerateInput):
            spearman([2, 2, 2], [1, 2, 3])

    def test_matches_reference_with_ties(self):
        rng = random.Random(5)
        checked = 0
        for _ in range(300):
            n = rng.randrange(5, 40)
            xs = [round(rng.uniform(0, 1), 1) for _ in range(n)]
            ys = [round(rng.uniform(0, 1), 1) for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            expected = scipy.stats.spearmanr(xs, ys).statistic
            assert spearman(xs, ys) == pytest.approx(expected, abs=1e-12)
            checked += 1
        assert checked > 200

    def test_equals_pearson_of_ranks(self):
        rng = random.Random(6)
        xs = [rng.choice([0.1, 0.2, 0.3, 0.4]) for _ in range(30)]
        ys = [rng.random() for _ in range(30)]
        assert spearman(xs, ys) == pearson(average_ranks(xs), average_ranks(ys))


class TestHistogram:
    def test_bin_count_and_edges(self):
        hist = distance_histogram([0.0, 0.04, 0.5, 0.99, 1.0])
        assert len(hist) == 20
        assert hist[0] == (0.0, 2)
        assert hist[10][1] == 1
        assert hist[19][1] == 2  # 0.99 and the 1.0 endpoint share the top bin

    def test_counts_sum(self):
        values = [i / 97 for i in range(98)]
        hist = distance_histogram(values)
        assert sum(count for _, count in hist) == len(values)

    def test_permutation_invariant(self):
        rng = random.Random(7)
        values = [rng.random() for _ in range(500)]
        shuffled = list(values)
        rng.shuffle(shuffled)
        assert distance_histogram(values) == distance_histogram(shuffled)


class TestCorrelationExperiment:
    def test_statements_equal_to_proofs_give_negative_r(self):
        # statements reuse the proof text, so similar statements mean
        # similar proofs and therefore low distances
        rng = random.Random(8)
        records = []
        for i in range(14):
            proof = " ".join(
                f"tac{rng.randrange(6)} arg{rng.randrange(4)}."
                for _ in range(rng.randrange(2, 7))
            )
            records.append(
                make_record(
                    i,
                    rng,
                    file=f"f{i % 3}.v",
                    statement=proof.replace(".", ""),
                    proof=split_tactics(proof),
                )
            )
        report = correlation_experiment(Corpus(records))
        assert report.pearson_r < -0.2
        assert report.spearman_rho < -0.2

    def test_identical_records_degenerate(self):
        rng = random.Random(9)
        proof = split_tactics("auto.")
        records = [
            make_record(i, rng, statement="same thing", proof=proof)
            for i in range(5)
        ]
        with pytest.raises(DegenerateInput):
            correlation_experiment(Corpus(records))

    def test_two_cluster_corpus_bimodal_histogram(self):
        # two families of internally identical proofs with char-disjoint
        # vocabularies: within-family distance 0, cross-family near 1
        rng = random.Random(10)
        short = split_tactics("auto.")
        long = split_tactics("unfold m. cases x. splits. firstorder.")
        records = [
            make_record(i, rng, file="s.v", statement=f"short {i}", proof=short)
            for i in range(8)
        ] + [
            make_record(i, rng, file="l.v", statement=f"long {i}", proof=long)
            for i in range(8, 16)
        ]
        report = correlation_experiment(Corpus(records))
        counts = [c for _, c in report.histogram]
        assert counts[0] == 2 * (8 * 7 // 2)
        assert sum(counts[16:]) == 8 * 8
        assert sum(counts[1:16]) == 0

    def test_report_counts_and_serialization(self, decorrelated_corpus):
        report = correlation_experiment(decorrelated_corpus)
        n = len(decorrelated_corpus)
        assert report.n_records == n
        assert report.n_pairs == n * (n - 1) // 2
        assert sum(c for _, c in report.histogram) == report.n_pairs
        obj = report.to_obj()
        assert obj["pearson_r"] == report.pearson_r
        assert len(obj["histogram"]) == 20
        assert "pearson" in report.table()

    def test_scorer_selection(self, decorrelated_corpus):
        jaccard = correlation_experiment(decorrelated_corpus, "jaccard")
        bm25 = correlation_experiment(decorrelated_corpus, "bm25")
        assert jaccard.scorer == "jaccard"
        assert bm25.scorer == "bm25"
        assert jaccard.n_pairs == bm25.n_pairs

    def test_custom_scorer_object(self, decorrelated_corpus):
        class Constant:
            name = "probe"

            def similarity(self, a, b):
                return 0.5 if a.id < b.id else 0.5

        with pytest.raises(DegenerateInput):
            correlation_experiment(decorrelated_corpus, Constant())

    def test_unknown_scorer_rejected(self, decorrelated_corpus):
        with pytest.raises(ValueError):
            correlation_experiment(decorrelated_corpus, "cosine")


class TestPairScorers:
    def test_jaccard_pair_scorer_symmetric(self, small_corpus):
        records = small_corpus.records()
        scorer = JaccardPairScorer(records)
        a, b = records[0], records[1]
        assert scorer.similarity(a, b) == scorer.similarity(b, a)

    def test_bm25_pair_scorer_symmetric(self, small_corpus):
        records = small_corpus.records()
        scorer = Bm25PairScorer(records)
        a, b = records[2], records[5]
        assert scorer.similarity(a, b) == pytest.approx(
            scorer.similarity(b, a)
        )
