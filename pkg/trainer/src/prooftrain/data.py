"""Reader and batch sampler for exported proof-pair datasets.

The expected directory layout is the one the pair-mining exporter writes:
``corpus/*.json`` record files, ``pairs.jsonl``, ``adjacency.json`` with
per-anchor positive / negative / hard-negative id lists, and ``splits.json``
assigning whole source files to train / val / test. Training batches pair
each sampled anchor with one uniformly chosen positive and ``k_neg``
negatives (hard negatives included alongside the ordinary ones); an anchor
with no positive or no negative inside its split is never sampled.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class DatasetError(Exception):
    """The dataset directory is missing pieces or malformed."""


class MissingSplit(DatasetError):
    """splits.json is absent, lacks a split, or the split has no records."""


class EmptyPositives(DatasetError):
    """No anchor in the requested split has a usable positive partner."""


SPLIT_NAMES = ("train", "val", "test")


def _read_json(path: Path, kind: str):
    if not path.is_file():
        raise DatasetError(f"{kind} not found at {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{kind} at {path} is not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class TrainingBatch:
    """Id-level batch: one positive per anchor plus a negative stack."""

    anchors: tuple[str, ...]
    positives: tuple[str, ...]
    negatives: tuple[tuple[str, ...], ...]


class PairDataset:
    """Statements, file assignments, splits, and pair adjacency."""

    def __init__(
        self,
        statements: dict[str, str],
        file_of: dict[str, str],
        splits: dict[str, list[str]],
        adjacency: dict[str, dict[str, list[str]]],
    ):
        self.statements = statements
        self.file_of = file_of
        self.splits = splits
        self.adjacency = adjacency

    @classmethod
    def load(cls, directory: str | Path) -> "PairDataset":
        root = Path(directory)
        corpus_dir = root / "corpus"
        if not corpus_dir.is_dir():
            raise DatasetError(f"no corpus directory under {root}")
        statements: dict[str, str] = {}
        file_of: dict[str, str] = {}
        for path in sorted(corpus_dir.glob("*.json")):
            for obj in _read_json(path, "corpus file"):
                statements[obj["id"]] = obj["statement"]
                file_of[obj["id"]] = obj["file"]
        if not statements:
            raise DatasetError(f"corpus directory {corpus_dir} holds no records")

        splits_path = root / "splits.json"
        if not splits_path.is_file():
            raise MissingSplit(f"splits.json not found under {root}")
        splits_obj = _read_json(splits_path, "splits.json")
        splits: dict[str, list[str]] = {}
        for name in SPLIT_NAMES:
            if name not in splits_obj:
                raise MissingSplit(f"splits.json has no {name!r} split")
            splits[name] = list(splits_obj[name])

        adjacency = _read_json(root / "adjacency.json", "adjacency.json")
        return cls(statements, file_of, splits, adjacency)

    def statement(self, record_id: str) -> str:
        return self.statements[record_id]

    def members(self, split: str) -> list[str]:
        """Record ids whose source file belongs to the split, sorted."""
        if split not in self.splits:
            raise MissingSplit(f"unknown split {split!r}")
        files = set(self.splits[split])
        return sorted(rid for rid, file in self.file_of.items() if file in files)

    def partners(self, split: str) -> dict[str, tuple[list[str], list[str]]]:
        """Per-anchor (positives, negatives) restricted to the split.

        Hard negatives count as negatives. Only anchors with at least one
        of each survive; partners outside the split are dropped so held-out
        records never leak into training batches.
        """
        member_set = set(self.members(split))
        if not member_set:
            raise MissingSplit(f"split {split!r} assigns no records")
        usable: dict[str, tuple[list[str], list[str]]] = {}
        for anchor in sorted(member_set):
            entry = self.adjacency.get(anchor)
            if entry is None:
                continue
            positives = [p for p in entry.get("positives", []) if p in member_set]
            negatives = [
                n
                for bucket in ("negatives", "hard_negatives")
                for n in entry.get(bucket, [])
                if n in member_set
            ]
            if positives and negatives:
                usable[anchor] = (positives, negatives)
        return usable


class BatchSampler:
    """Uniform anchor/positive/negative sampler over one split."""

    def __init__(
        self,
        dataset: PairDataset,
        split: str,
        batch_size: int,
        k_neg: int,
        rng: random.Random,
    ):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        if k_neg < 1:
            raise ValueError(f"k_neg must be >= 1, got {k_neg}")
        self.dataset = dataset
        self.batch_size = batch_size
        self.k_neg = k_neg
        self.rng = rng
        self.partners = dataset.partners(split)
        if not self.partners:
            member_set = set(dataset.members(split))
            has_positive = any(
                any(
                    p in member_set
                    for p in dataset.adjacency.get(a, {}).get("positives", [])
                )
                for a in member_set
            )
            if not has_positive:
                raise EmptyPositives(
                    f"no anchor in split {split!r} has a positive partner"
                )
            raise DatasetError(
                f"no anchor in split {split!r} has both a positive and a "
                "negative partner"
            )
        self.anchor_pool: Sequence[str] = sorted(self.partners)

    def next_batch(self) -> TrainingBatch:
        anchors: list[str] = []
        positives: list[str] = []
        negatives: list[tuple[str, ...]] = []
        for _ in range(self.batch_size):
            anchor = self.rng.choice(self.anchor_pool)
            pos_pool, neg_pool = self.partners[anchor]
            anchors.append(anchor)
            positives.append(self.rng.choice(pos_pool))
            negatives.append(
                tuple(self.rng.choice(neg_pool) for _ in range(self.k_neg))
            )
        return TrainingBatch(tuple(anchors), tuple(positives), tuple(negatives))
