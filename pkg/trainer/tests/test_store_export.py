"""Tests for embedding export in the ranker's store format."""

import json
import math

import numpy as np
import pytest
import torch
from proofrank import load_embeddings

from prooftrain import (
    BpeTokenizer,
    build_model,
    embed_statements,
    encode_corpus,
    read_corpus_statements,
    train,
    write_store,
)

from trainer_cases import fast_config


@pytest.fixture(scope="module")
def trained(tmp_path_factory, separable_dataset):
    ckpt = tmp_path_factory.mktemp("export") / "embedder.pt"
    train(separable_dataset, fast_config(steps=6), checkpoint_out=ckpt)
    return ckpt


class TestWriteStore:
    def test_header_then_sorted_rows(self, tmp_path):
        rows = [
            ("z", np.array([0.0, 1.0])),
            ("a", np.array([1.0, 0.0])),
        ]
        out = write_store(rows, tmp_path / "store.jsonl")
        lines = out.read_text().splitlines()
        assert json.loads(lines[0]) == {"dim": 2, "count": 2}
        assert [json.loads(l)["id"] for l in lines[1:]] == ["a", "z"]

    def test_empty_store_is_refused(self, tmp_path):
        with pytest.raises(ValueError):
            write_store([], tmp_path / "store.jsonl")

    def test_ragged_vectors_are_refused(self, tmp_path):
        rows = [("a", np.array([1.0, 0.0])), ("b", np.array([1.0]))]
        with pytest.raises(ValueError, match="dimension"):
            write_store(rows, tmp_path / "store.jsonl")

    def test_no_temp_file_survives_success(self, tmp_path):
        write_store([("a", np.array([1.0, 0.0]))], tmp_path / "store.jsonl")
        assert [p.name for p in tmp_path.iterdir()] == ["store.jsonl"]

    def test_failed_rename_leaves_no_partial_store(self, tmp_path, monkeypatch):
        import prooftrain.export as export_module

        def exploding_replace(src, dst):
            raise OSError("disk on fire")

        monkeypatch.setattr(export_module.os, "replace", exploding_replace)
        with pytest.raises(OSError):
            write_store([("a", np.array([1.0, 0.0]))], tmp_path / "store.jsonl")
        assert list(tmp_path.iterdir()) == []


class TestEmbedStatements:
    def test_vectors_are_float64_unit_norm(self, trained, separable_dataset):
        from prooftrain import load_checkpoint

        model, tokenizer, _ = load_checkpoint(trained)
        items = read_corpus_statements(separable_dataset)[:10]
        rows = embed_statements(model, tokenizer, items)
        assert len(rows) == 10
        for _, vector in rows:
            assert vector.dtype == np.float64
            assert math.isclose(
                float(np.linalg.norm(vector)), 1.0, abs_tol=1e-12
            )

    def test_duplicate_statements_get_identical_vectors(self, trained):
        from prooftrain import load_checkpoint

        model, tokenizer, _ = load_checkpoint(trained)
        rows = embed_statements(
            model,
            tokenizer,
            [("one", "shared statement text"), ("two", "shared statement text")],
        )
        assert np.array_equal(rows[0][1], rows[1][1])

    def test_truncation_applies_beyond_max_seq_len(self, trained):
        from prooftrain import load_checkpoint

        model, tokenizer, config = load_checkpoint(trained)
        head = "tok " * 200  # far beyond the sequence budget
        rows = embed_statements(
            model,
            tokenizer,
            [("long", head + "tail marker"), ("short", head.strip())],
        )
        assert np.array_equal(rows[0][1], rows[1][1])


class TestEncodeCorpus:
    def test_store_loads_cleanly_in_the_ranker(
        self, trained, separable_dataset, tmp_path
    ):
        out, count, dim = encode_corpus(
            trained, separable_dataset, tmp_path / "store.jsonl"
        )
        assert count == 200
        store = load_embeddings(out)
        assert store.dim == dim
        assert len(store.ids()) == 200

    def test_corpus_subdirectory_is_accepted(
        self, trained, separable_dataset, tmp_path
    ):
        direct = encode_corpus(
            trained, separable_dataset / "corpus", tmp_path / "direct.jsonl"
        )
        nested = encode_corpus(
            trained, separable_dataset, tmp_path / "nested.jsonl"
        )
        assert direct[0].read_text() == nested[0].read_text()

    def test_header_matches_the_config_dimension(
        self, trained, separable_dataset, tmp_path
    ):
        out, _, dim = encode_corpus(
            trained, separable_dataset, tmp_path / "store.jsonl"
        )
        header = json.loads(out.read_text().splitlines()[0])
        assert header == {"dim": dim, "count": 200}

    def test_empty_corpus_is_refused(self, trained, tmp_path):
        empty = tmp_path / "empty"
        (empty / "corpus").mkdir(parents=True)
        with pytest.raises(ValueError, match="no corpus records"):
            encode_corpus(trained, empty, tmp_path / "store.jsonl")


class TestDefaultDimension:
    def test_untrained_default_model_exports_768(self, tmp_path):
        config = fast_config(
            embedding_dim=768, hidden_dim=256, n_layers=4, n_heads=4
        )
        texts = ["alpha one", "beta two", "gamma three"]
        tokenizer = BpeTokenizer.train(texts, max_merges=50)
        torch.manual_seed(0)
        model = build_model(tokenizer.vocab_size(), config)
        model.eval()
        rows = embed_statements(
            model, tokenizer, [(f"r{i}", t) for i, t in enumerate(texts)]
        )
        out = write_store(rows, tmp_path / "store.jsonl")
        lines = out.read_text().splitlines()
        assert json.loads(lines[0]) == {"dim": 768, "count": 3}
        assert len(lines) == 4
        store = load_embeddings(out)
        assert store.dim == 768
