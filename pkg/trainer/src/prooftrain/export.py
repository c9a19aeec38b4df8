"""Embedding export in the ranker's JSONL store format.

A store is a header line ``{"dim": d, "count": n}`` followed by one
``{"id": ..., "vector": [...]}`` line per record, sorted by id. Vectors are
renormalized in float64 right before serialization so the unit-norm check on
the consuming side holds after the JSON round trip. The file lands via a
temp-file-plus-rename so a crash never leaves a partial store behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import StatementEncoder, encode_texts
from .tokenizer import BpeTokenizer
from .train import load_checkpoint


def embed_statements(
    model: StatementEncoder,
    tokenizer: BpeTokenizer,
    items: Sequence[tuple[str, str]],
    batch_size: int = 64,
) -> list[tuple[str, np.ndarray]]:
    """Embed (id, statement) pairs into float64 unit vectors."""
    texts = [text for _, text in items]
    vectors = encode_texts(model, tokenizer, texts, batch_size=batch_size)
    rows: list[tuple[str, np.ndarray]] = []
    for (record_id, _), vector in zip(items, vectors):
        v = vector.numpy().astype(np.float64)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ValueError(f"zero embedding for {record_id!r}")
        rows.append((record_id, v / norm))
    return rows


def write_store(
    rows: Iterable[tuple[str, np.ndarray]], out_path: str | Path
) -> Path:
    """Write embedding rows as a JSONL store, atomically."""
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(rows, key=lambda item: item[0])
    if not ordered:
        raise ValueError("refusing to write an empty embedding store")
    dim = len(ordered[0][1])
    lines = [json.dumps({"dim": dim, "count": len(ordered)})]
    for record_id, vector in ordered:
        if len(vector) != dim:
            raise ValueError(
                f"vector for {record_id!r} has dimension {len(vector)}, "
                f"expected {dim}"
            )
        lines.append(
            json.dumps({"id": record_id, "vector": [float(x) for x in vector]})
        )
    fd, tmp_name = tempfile.mkstemp(
        dir=out.parent, prefix=out.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
        os.replace(tmp_name, out)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return out


def read_corpus_statements(corpus_dir: str | Path) -> list[tuple[str, str]]:
    """Collect (id, statement) pairs from a corpus directory, sorted by id."""
    root = Path(corpus_dir)
    if (root / "corpus").is_dir():
        root = root / "corpus"
    items: dict[str, str] = {}
    for path in sorted(root.glob("*.json")):
        for obj in json.loads(path.read_text(encoding="utf-8")):
            items[obj["id"]] = obj["statement"]
    if not items:
        raise ValueError(f"no corpus records found under {corpus_dir}")
    return sorted(items.items())


def encode_corpus(
    checkpoint_path: str | Path,
    corpus_dir: str | Path,
    out_path: str | Path,
    batch_size: int = 64,
) -> tuple[Path, int, int]:
    """Load a checkpoint, embed a corpus, and write the store.

    Returns the store path, the number of vectors, and their dimension.
    """
    model, tokenizer, config = load_checkpoint(checkpoint_path)
    items = read_corpus_statements(corpus_dir)
    rows = embed_statements(model, tokenizer, items, batch_size=batch_size)
    out = write_store(rows, out_path)
    return out, len(rows), config.embedding_dim
