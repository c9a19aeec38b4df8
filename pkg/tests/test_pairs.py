"""All-pairs distances, threshold labeling, splits, dataset export."""

from __future__ import annotations

import itertools
import json
import math
import random

import pytest

from proofrank import (
    Corpus,
    DistanceParams,
    Label,
    MiningConfig,
    TooFewFiles,
    all_pair_distances,
    build_dataset,
    export_dataset,
    label_pair,
    mine_labeled_pairs,
    proof_distance,
    split_by_file,
    split_tactics,
)
from proofrank.pairs import _derived_rng

from corpus_cases import make_record, synthetic_records


class TestAllPairDistances:
    def test_pair_count_small(self):
        records = synthetic_records(5, seed=1)
        pairs = list(all_pair_distances(records))
        assert len(pairs) == 10

    def test_single_record_no_pairs(self):
        assert list(all_pair_distances(synthetic_records(1))) == []

    def test_ids_sorted_within_and_across_pairs(self):
        records = synthetic_records(6, seed=2)
        pairs = list(all_pair_distances(records))
        assert all(left < right for left, right, _ in pairs)
        keys = [(left, right) for left, right, _ in pairs]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_noiseless_values_match_per_pair_oracle(self):
        records = synthetic_records(5, seed=3)
        params = DistanceParams(noise_amplitude=0.0)
        by_id = {r.id: r for r in records}
        for left, right, distance in all_pair_distances(records, params):
            expected = proof_distance(by_id[left].proof, by_id[right].proof, params)
            assert distance == pytest.approx(expected, abs=1e-12)

    def test_noise_stays_within_amplitude_of_base(self):
        records = synthetic_records(8, seed=4)
        amp = 2e-3
        noisy = list(
            all_pair_distances(records, DistanceParams(noise_amplitude=amp))
        )
        base = list(
            all_pair_distances(records, DistanceParams(noise_amplitude=0.0))
        )
        for (l1, r1, dn), (l2, r2, db) in zip(noisy, base):
            assert (l1, r1) == (l2, r2)
            assert abs(dn - db) <= amp + 1e-12
            assert 0.0 <= dn <= 1.0

    def test_deterministic_under_seed(self):
        records = synthetic_records(10, seed=5)
        first = list(all_pair_distances(records, seed=42))
        second = list(all_pair_distances(records, seed=42))
        assert first == second

    def test_different_seed_changes_noise_only(self):
        records = synthetic_records(10, seed=5)
        a = list(all_pair_distances(records, seed=1))
        b = list(all_pair_distances(records, seed=2))
        assert [(l, r) for l, r, _ in a] == [(l, r) for l, r, _ in b]
        assert any(da != db for (_, _, da), (_, _, db) in zip(a, b))

    def test_input_order_irrelevant(self):
        records = synthetic_records(7, seed=6)
        shuffled = list(records)
        random.Random(0).shuffle(shuffled)
        assert list(all_pair_distances(records, seed=9)) == list(
            all_pair_distances(shuffled, seed=9)
        )

    def test_chunk_rngs_are_stream_position_keyed(self):
        # same seed, two runs, chunk boundary behavior identical
        records = synthetic_records(100, seed=7)  # 4950 pairs, > one chunk
        run = list(all_pair_distances(records, seed=3))
        assert len(run) == 4950
        assert run == list(all_pair_distances(records, seed=3))


class TestLabelPair:
    config = MiningConfig()

    def rng(self) -> random.Random:
        return random.Random(0)

    def test_positive_below_threshold(self):
        assert label_pair(0.2, self.config, self.rng()) is Label.POSITIVE

    def test_negative_above_threshold(self):
        assert label_pair(0.7, self.config, self.rng()) is Label.NEGATIVE

    def test_boundary_tau_pos_is_not_positive(self):
        label = label_pair(0.3, self.config, self.rng())
        assert label is Label.UNLABELED

    def test_boundary_tau_neg_in_hard_window(self):
        seen = {label_pair(0.65, self.config, random.Random(s)) for s in range(40)}
        assert seen <= {Label.HARD_NEGATIVE, Label.UNLABELED}
        assert Label.HARD_NEGATIVE in seen and Label.UNLABELED in seen

    def test_window_draw_decides(self):
        class FixedRng:
            def __init__(self, value):
                self.value = value

            def random(self):
                return self.value

        assert label_pair(0.5, self.config, FixedRng(0.1)) is Label.HARD_NEGATIVE
        assert label_pair(0.5, self.config, FixedRng(0.9)) is Label.UNLABELED

    def test_between_pos_and_window_unlabeled(self):
        rng = self.rng()
        assert label_pair(0.35, self.config, rng) is Label.UNLABELED

    def test_rng_advances_only_in_window(self):
        rng = random.Random(1)
        before = rng.getstate()
        label_pair(0.1, self.config, rng)
        label_pair(0.9, self.config, rng)
        assert rng.getstate() == before
        label_pair(0.5, self.config, rng)
        assert rng.getstate() != before

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MiningConfig(tau_pos=0.7, tau_neg=0.65)
        with pytest.raises(ValueError):
            MiningConfig(tau_hard=0.2)
        with pytest.raises(ValueError):
            MiningConfig(hard_negative_prob=1.5)
        with pytest.raises(ValueError):
            MiningConfig(split_ratios=(0.5, 0.5, 0.5))

    def test_labels_reproducible_and_consistent(self):
        records = synthetic_records(30, seed=8)
        config = MiningConfig(seed=17)
        first = list(mine_labeled_pairs(records, config))
        second = list(mine_labeled_pairs(records, config))
        assert first == second
        for pair in first:
            if pair.label is Label.POSITIVE:
                assert pair.distance < config.tau_pos
            elif pair.label is Label.NEGATIVE:
                assert pair.distance > config.tau_neg
            elif pair.label is Label.HARD_NEGATIVE:
                assert config.tau_hard <= pair.distance <= config.tau_neg


class TestHardNegativeFraction:
    def test_window_fraction_converges(self):
        config = MiningConfig()
        rng = _derived_rng(config.seed, "labels")
        uniform = random.Random(123)
        hits = 0
        n_window = 10_000
        for _ in range(n_window):
            d = uniform.uniform(config.tau_hard, config.tau_neg)
            if label_pair(d, config, rng) is Label.HARD_NEGATIVE:
                hits += 1
        p = config.hard_negative_prob
        sigma = math.sqrt(p * (1 - p) / n_window)
        assert abs(hits / n_window - p) <= 3 * sigma


class TestSplitByFile:
    def test_ten_equal_files(self):
        records = synthetic_records(100, seed=9, files=10)
        split = split_by_file(records)
        sizes = (len(split.train), len(split.val), len(split.test))
        assert sizes == (7, 2, 1)

    @staticmethod
    def records_with_sizes(sizes: dict[str, int]):
        records = []
        index = 0
        for file, count in sizes.items():
            for _ in range(count):
                records.append(make_record(index, random.Random(0), file=file))
                index += 1
        return records

    def test_greedy_descending_assignment(self):
        # whole-file granularity: the 30-record file forces train to land
        # within [70, 80] of its 70-record target
        sizes = {"a.v": 50, "b.v": 30, "c.v": 10, "d.v": 10}
        split = split_by_file(self.records_with_sizes(sizes))
        counts = {
            name: sum(sizes[f] for f in getattr(split, name))
            for name in ("train", "val", "test")
        }
        assert split.bin_of("a.v") == "train"
        assert 70 <= counts["train"] <= 80
        assert set(itertools.chain(split.train, split.val, split.test)) == set(
            sizes
        )

    def test_greedy_hand_traced_without_deficit_ties(self):
        # 60 -> train; 20 -> val (deficit 20 beats 10); 12 -> train
        # (tie with test resolved toward train); 8 -> test
        sizes = {"a.v": 60, "b.v": 20, "c.v": 12, "d.v": 8}
        split = split_by_file(self.records_with_sizes(sizes))
        assert set(split.train) == {"a.v", "c.v"}
        assert set(split.val) == {"b.v"}
        assert set(split.test) == {"d.v"}

    def test_degenerate_gets_warning(self):
        records = []
        for i in range(90):
            records.append(make_record(i, random.Random(0), file="giant.v"))
        records.append(make_record(90, random.Random(0), file="t1.v"))
        records.append(make_record(91, random.Random(0), file="t2.v"))
        split = split_by_file(records)
        assert split.bin_of("giant.v") == "train"
        assert split.warnings

    def test_too_few_files(self):
        with pytest.raises(TooFewFiles):
            split_by_file(synthetic_records(10, files=2))

    def test_disjoint_and_covering(self):
        records = synthetic_records(200, seed=10, files=17)
        split = split_by_file(records)
        all_files = {r.file for r in records}
        assert set(split.train) | set(split.val) | set(split.test) == all_files
        assert not (set(split.train) & set(split.val))
        assert not (set(split.train) & set(split.test))
        assert not (set(split.val) & set(split.test))

    def test_seed_breaks_ties_deterministically(self):
        records = synthetic_records(40, seed=11, files=8)
        assert split_by_file(records, seed=1) == split_by_file(records, seed=1)


class TestExportDataset:
    def make_corpus(self, n=24, files=4, seed=12) -> Corpus:
        return Corpus(synthetic_records(n, seed=seed, files=files))

    def test_layout_and_manifest(self, tmp_path):
        corpus = self.make_corpus()
        config = MiningConfig(seed=5)
        manifest, split = build_dataset(corpus, config, tmp_path / "out")
        out = tmp_path / "out"
        assert (out / "pairs.jsonl").exists()
        assert (out / "splits.json").exists()
        assert (out / "adjacency.json").exists()
        assert (out / "manifest.json").exists()
        corpus_files = list((out / "corpus").glob("*.json"))
        assert len(corpus_files) == 4
        assert manifest["n_records"] == 24
        assert manifest["n_pairs_scanned"] == 24 * 23 // 2
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest

    def test_unlabeled_not_exported(self, tmp_path):
        corpus = self.make_corpus()
        config = MiningConfig(seed=5)
        manifest, _ = build_dataset(corpus, config, tmp_path / "out")
        lines = (tmp_path / "out" / "pairs.jsonl").read_text().splitlines()
        assert len(lines) == manifest["n_pairs"]
        labels = {json.loads(line)["label"] for line in lines}
        assert "unlabeled" not in labels

    def test_adjacency_mirrors_pairs(self, tmp_path):
        corpus = self.make_corpus()
        build_dataset(corpus, MiningConfig(seed=5), tmp_path / "out")
        adjacency = json.loads((tmp_path / "out" / "adjacency.json").read_text())
        pairs = [
            json.loads(line)
            for line in (tmp_path / "out" / "pairs.jsonl").read_text().splitlines()
        ]
        bucket = {
            "positive": "positives",
            "negative": "negatives",
            "hard_negative": "hard_negatives",
        }
        for pair in pairs:
            assert pair["right"] in adjacency[pair["left"]][bucket[pair["label"]]]
            assert pair["left"] in adjacency[pair["right"]][bucket[pair["label"]]]
        for entry in adjacency.values():
            for ids in entry.values():
                assert ids == sorted(ids)

    def test_rerun_byte_identical(self, tmp_path):
        corpus = self.make_corpus()
        config = MiningConfig(seed=9)
        manifest1, _ = build_dataset(corpus, config, tmp_path / "a")
        manifest2, _ = build_dataset(corpus, config, tmp_path / "b")
        assert manifest1["hash"] == manifest2["hash"]
        for name in ("pairs.jsonl", "splits.json", "adjacency.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_different_seed_different_hash(self, tmp_path):
        corpus = self.make_corpus()
        m1, _ = build_dataset(corpus, MiningConfig(seed=1), tmp_path / "a")
        m2, _ = build_dataset(corpus, MiningConfig(seed=2), tmp_path / "b")
        assert m1["hash"] != m2["hash"]

    def test_empty_pair_list_still_valid(self, tmp_path):
        corpus = self.make_corpus()
        split = split_by_file(corpus)
        manifest = export_dataset(
            corpus, iter([]), split, tmp_path / "out", MiningConfig()
        )
        assert manifest["n_pairs"] == 0
        assert json.loads((tmp_path / "out" / "adjacency.json").read_text()) == {}

    def test_four_record_corpus_pair_arithmetic(self, tmp_path):
        records = [
            make_record(i, random.Random(0), file=f"f{i}.v",
                        proof=split_tactics(f"tac{i}."))
            for i in range(4)
        ]
        corpus = Corpus(records)
        manifest, _ = build_dataset(corpus, MiningConfig(), tmp_path / "out")
        assert manifest["n_pairs_scanned"] == 6

    def test_config_echoed_in_manifest(self, tmp_path):
        config = MiningConfig(tau_pos=0.25, seed=3)
        manifest, _ = build_dataset(self.make_corpus(), config, tmp_path / "out")
        assert manifest["config"]["tau_pos"] == 0.25
        assert manifest["config"]["seed"] == 3
