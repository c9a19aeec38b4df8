"""Contrastive pair mining: distance streaming, labeling, splits, export.

All n*(n-1)/2 unordered pairs are streamed in sorted-id order. Distances carry
the configured jitter, drawn from per-chunk rng substreams so the stream is
reproducible and safe to parallelize by chunk. Labels follow fixed thresholds
with a probabilistic hard-negative window. Splits are file-disjoint so near-
duplicate statements inside one source file can never straddle train/test.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .corpus import Corpus, corpus_filename, record_to_obj
from .metrics import DistanceParams
from .parsing import Diagnostic, Severity, TheoremRecord

__all__ = [
    "Label",
    "LabeledPair",
    "MiningConfig",
    "SplitAssignment",
    "TooFewFiles",
    "all_pair_distances",
    "label_pair",
    "mine_labeled_pairs",
    "split_by_file",
    "export_dataset",
    "build_dataset",
]

_CHUNK_SIZE = 4096  # pairs per rng substream; part of the stream definition


class TooFewFiles(Exception):
    pass


class Label(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    HARD_NEGATIVE = "hard_negative"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class LabeledPair:
    left: str  # record id, always < right
    right: str
    distance: float
    label: Label


@dataclass(frozen=True)
class MiningConfig:
    tau_pos: float = 0.3
    tau_neg: float = 0.65
    tau_hard: float = 0.45
    hard_negative_prob: float = 0.30
    distance: DistanceParams = field(default_factory=DistanceParams)
    split_ratios: tuple[float, float, float] = (0.70, 0.20, 0.10)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_pos < self.tau_hard <= self.tau_neg <= 1.0:
            raise ValueError(
                "thresholds must satisfy 0 <= tau_pos < tau_hard <= tau_neg <= 1, "
                f"got ({self.tau_pos}, {self.tau_hard}, {self.tau_neg})"
            )
        if not 0.0 <= self.hard_negative_prob <= 1.0:
            raise ValueError(f"bad hard_negative_prob {self.hard_negative_prob}")
        if len(self.split_ratios) != 3 or any(r < 0 for r in self.split_ratios):
            raise ValueError(f"bad split_ratios {self.split_ratios}")
        if abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError(f"split_ratios must sum to 1, got {self.split_ratios}")

    def to_obj(self) -> dict:
        return {
            "tau_pos": self.tau_pos,
            "tau_neg": self.tau_neg,
            "tau_hard": self.tau_hard,
            "hard_negative_prob": self.hard_negative_prob,
            "alpha": self.distance.alpha,
            "noise_amplitude": self.distance.noise_amplitude,
            "split_ratios": list(self.split_ratios),
            "seed": self.seed,
        }


def _derived_rng(seed: int, stream: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}/{stream}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


# ---------------------------------------------------------------------------
# Distance streaming

class _PairEngine:
    """Interned-tactic evaluator for bulk pair distances.

    Substitution costs between distinct tactic texts are cached, and the
    tactic-level DP runs over integer ids, which keeps the full quadratic
    stream tractable at corpus scale. Results are bit-identical to
    ``proof_distance`` on the same inputs.
    """

    def __init__(self, records: Sequence[TheoremRecord]):
        from .metrics import tactic_substitution_cost

        self._subst = tactic_substitution_cost
        intern: dict[str, int] = {}
        self._texts: list[str] = []
        self._seqs: list[list[int]] = []
        self._sets: list[frozenset[int]] = []
        for record in records:
            ids = []
            for text in record.proof.texts():
                idx = intern.get(text)
                if idx is None:
                    idx = len(self._texts)
                    intern[text] = idx
                    self._texts.append(text)
                ids.append(idx)
            self._seqs.append(ids)
            self._sets.append(frozenset(ids))
        self._cost_cache: dict[int, float] = {}
        self._n_texts = len(self._texts)

    def _cost(self, a: int, b: int) -> float:
        if a == b:
            return 0.0
        key = a * self._n_texts + b if a < b else b * self._n_texts + a
        cached = self._cost_cache.get(key)
        if cached is None:
            cached = self._subst(self._texts[a], self._texts[b])
            self._cost_cache[key] = cached
        return cached

    def edit_channel(self, i: int, j: int) -> float:
        xs = self._seqs[i]
        ys = self._seqs[j]
        n, m = len(xs), len(ys)
        if n == 0 and m == 0:
            return 0.0
        if n == 0 or m == 0:
            return 1.0
        if xs == ys:
            return 0.0
        cost = self._cost
        prev = [float(k) for k in range(m + 1)]
        for a in range(1, n + 1):
            xi = xs[a - 1]
            cur = [float(a)]
            append = cur.append
            for b in range(1, m + 1):
                yj = ys[b - 1]
                c = 0.0 if xi == yj else cost(xi, yj)
                diag = prev[b - 1] + c
                up = prev[b] + 1.0
                left = cur[b - 1] + 1.0
                best = diag if diag <= up else up
                append(best if best <= left else left)
            prev = cur
        return prev[m] / (n if n >= m else m)

    def set_channel(self, i: int, j: int) -> float:
        sa = self._sets[i]
        sb = self._sets[j]
        if not sa and not sb:
            return 0.0
        return 1.0 - len(sa & sb) / len(sa | sb)


def all_pair_distances(
    records: Sequence[TheoremRecord] | Corpus,
    params: DistanceParams = DistanceParams(),
    seed: int = 0,
) -> Iterator[tuple[str, str, float]]:
    """Yield (left_id, right_id, distance) for every unordered pair, ids
    sorted within each pair and pairs in lexicographic order. Jitter rngs are
    derived per 4096-pair chunk from (seed, chunk index), so a fixed seed
    reproduces the stream exactly no matter how chunks are scheduled.
    """
    if isinstance(records, Corpus):
        ordered = records.records()
    else:
        ordered = sorted(records, key=lambda r: r.id)
    engine = _PairEngine(ordered)
    alpha = params.alpha
    beta = 1.0 - params.alpha
    amp = params.noise_amplitude
    rng: Optional[random.Random] = None
    pair_index = 0
    n = len(ordered)
    for i in range(n):
        left = ordered[i].id
        for j in range(i + 1, n):
            value = alpha * engine.edit_channel(i, j) + beta * engine.set_channel(i, j)
            if amp > 0.0:
                if pair_index % _CHUNK_SIZE == 0:
                    rng = _derived_rng(seed, f"noise.{pair_index // _CHUNK_SIZE}")
                value += rng.uniform(-amp, amp)
                value = min(1.0, max(0.0, value))
            else:
                value = min(1.0, max(0.0, value))
            yield left, ordered[j].id, value
            pair_index += 1


# ---------------------------------------------------------------------------
# Labeling

def label_pair(
    distance: float, config: MiningConfig, rng: random.Random
) -> Label:
    """Threshold labeling with a probabilistic hard-negative window.

    distance < tau_pos is positive (strict); distance > tau_neg is negative
    (strict); inside [tau_hard, tau_neg] the pair becomes a hard negative with
    probability hard_negative_prob, else stays unlabeled. Everything else is
    unlabeled. The rng advances only for in-window pairs.
    """
    if distance < config.tau_pos:
        return Label.POSITIVE
    if config.tau_hard <= distance <= config.tau_neg:
        if rng.random() < config.hard_negative_prob:
            return Label.HARD_NEGATIVE
        return Label.UNLABELED
    if distance > config.tau_neg:
        return Label.NEGATIVE
    return Label.UNLABELED


def mine_labeled_pairs(
    records: Sequence[TheoremRecord] | Corpus, config: MiningConfig
) -> Iterator[LabeledPair]:
    """Stream every pair with its label (unlabeled ones included; exporters
    filter). Reproducible: distances and labels both derive from config.seed."""
    label_rng = _derived_rng(config.seed, "labels")
    for left, right, distance in all_pair_distances(
        records, config.distance, config.seed
    ):
        yield LabeledPair(left, right, distance, label_pair(distance, config, label_rng))


# ---------------------------------------------------------------------------
# File-disjoint splits

@dataclass(frozen=True)
class SplitAssignment:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    warnings: tuple[Diagnostic, ...] = ()

    def all_files(self) -> set[str]:
        return set(self.train) | set(self.val) | set(self.test)

    def bin_of(self, file: str) -> Optional[str]:
        for name in ("train", "val", "test"):
            if file in getattr(self, name):
                return name
        return None

    def to_obj(self) -> dict:
        return {
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
        }


def split_by_file(
    records: Sequence[TheoremRecord] | Corpus,
    ratios: tuple[float, float, float] = (0.70, 0.20, 0.10),
    seed: int = 0,
) -> SplitAssignment:
    """Greedy bin-packing of whole files into train/val/test.

    Files are taken in descending theorem count (seed-keyed hash breaks ties)
    and each goes to the bin with the largest remaining deficit against its
    target. Needs at least 3 files; emits a Warning diagnostic when realized
    fractions land more than 5 points from the targets.
    """
    if isinstance(records, Corpus):
        by_file = {f: len(rs) for f, rs in records.files().items()}
    else:
        by_file = {}
        for record in records:
            by_file[record.file] = by_file.get(record.file, 0) + 1
    if len(by_file) < 3:
        raise TooFewFiles(
            f"file-disjoint splitting needs >= 3 files, got {len(by_file)}"
        )

    def tie_key(file: str) -> str:
        return hashlib.sha256(f"{seed}:{file}".encode("utf-8")).hexdigest()

    order = sorted(by_file, key=lambda f: (-by_file[f], tie_key(f)))
    total = sum(by_file.values())
    bins: list[list[str]] = [[], [], []]
    counts = [0, 0, 0]
    for file in order:
        deficits = [ratios[k] * total - counts[k] for k in range(3)]
        target = max(range(3), key=lambda k: (deficits[k], -k))
        bins[target].append(file)
        counts[target] += by_file[file]

    warnings: list[Diagnostic] = []
    for k, name in enumerate(("train", "val", "test")):
        realized = counts[k] / total if total else 0.0
        if abs(realized - ratios[k]) > 0.05:
            warnings.append(
                Diagnostic(
                    file="(split)",
                    message=(
                        f"{name} holds {realized:.1%} of theorems vs target "
                        f"{ratios[k]:.0%}; file granularity too coarse"
                    ),
                    severity=Severity.WARNING,
                )
            )
    return SplitAssignment(
        train=tuple(sorted(bins[0])),
        val=tuple(sorted(bins[1])),
        test=tuple(sorted(bins[2])),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Export

def _dump_json(path: Path, obj: object) -> bytes:
    data = (json.dumps(obj, indent=1, ensure_ascii=True) + "\n").encode("utf-8")
    path.write_bytes(data)
    return data


def export_dataset(
    corpus: Corpus,
    pairs: Iterable[LabeledPair],
    split: SplitAssignment,
    out_dir: str | Path,
    config: MiningConfig,
) -> dict:
    """Write the dataset directory and return its manifest.

    Layout: corpus/<file>.json, pairs.jsonl (labeled pairs only), splits.json,
    adjacency.json (per-anchor positive/negative/hard-negative id lists), and
    manifest.json with counts, the config echo, and a content hash over the
    other files. Identical inputs produce byte-identical trees.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hasher = hashlib.sha256()

    (out / "corpus").mkdir(parents=True, exist_ok=True)
    for file, records in corpus.files().items():
        payload = [record_to_obj(r) for r in records]
        hasher.update(_dump_json(out / "corpus" / corpus_filename(file), payload))

    adjacency: dict[str, dict[str, list[str]]] = {}

    def adj(anchor: str) -> dict[str, list[str]]:
        entry = adjacency.get(anchor)
        if entry is None:
            entry = {"positives": [], "negatives": [], "hard_negatives": []}
            adjacency[anchor] = entry
        return entry

    n_scanned = 0
    label_counts = {label.value: 0 for label in Label}
    pairs_path = out / "pairs.jsonl"
    with pairs_path.open("wb") as fh:
        for pair in pairs:
            n_scanned += 1
            label_counts[pair.label.value] += 1
            if pair.label is Label.UNLABELED:
                continue
            line = json.dumps(
                {
                    "left": pair.left,
                    "right": pair.right,
                    "distance": pair.distance,
                    "label": pair.label.value,
                },
                ensure_ascii=True,
            ).encode("utf-8") + b"\n"
            fh.write(line)
            hasher.update(line)
            bucket = {
                Label.POSITIVE: "positives",
                Label.NEGATIVE: "negatives",
                Label.HARD_NEGATIVE: "hard_negatives",
            }[pair.label]
            adj(pair.left)[bucket].append(pair.right)
            adj(pair.right)[bucket].append(pair.left)

    for entry in adjacency.values():
        for bucket in entry.values():
            bucket.sort()
    adjacency = dict(sorted(adjacency.items()))
    hasher.update(_dump_json(out / "adjacency.json", adjacency))
    hasher.update(_dump_json(out / "splits.json", split.to_obj()))

    n_labeled = sum(
        count for label, count in label_counts.items()
        if label != Label.UNLABELED.value
    )
    manifest = {
        "n_records": len(corpus),
        "n_pairs": n_labeled,
        "n_pairs_scanned": n_scanned,
        "label_counts": label_counts,
        "config": config.to_obj(),
        "hash": hasher.hexdigest(),
    }
    _dump_json(out / "manifest.json", manifest)
    return manifest


def build_dataset(
    corpus: Corpus, config: MiningConfig, out_dir: str | Path
) -> tuple[dict, SplitAssignment]:
    """Split, stream, label, and export in one call."""
    split = split_by_file(corpus, config.split_ratios, config.seed)
    manifest = export_dataset(
        corpus, mine_labeled_pairs(corpus, config), split, out_dir, config
    )
    return manifest, split
