"""Premise-selection ranking: scorers, top-k retrieval, embedding stores.

Retrieval is deliberately simple: score a target statement against a candidate
pool (by default the other theorems from the same source file), sort, return
the top k with ties broken by ascending record id. The evaluation harness
pairs retrieval with a mock generator that "solves" a target when any
retrieved proof is within a distance budget of the target's own proof, which
turns retrieval quality into a scalar without running a prover.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence

import numpy as np

from .corpus import Corpus
from .metrics import Bm25Index, DistanceParams, proof_distance
from .parsing import TheoremRecord, tokenize_statement

__all__ = [
    "RankerError",
    "EmptyPool",
    "EmbeddingMissing",
    "EmbeddingFormatError",
    "DimMismatch",
    "NotNormalized",
    "RankedResult",
    "Scorer",
    "JaccardScorer",
    "Bm25Scorer",
    "EmbeddingScorer",
    "EmbeddingStore",
    "load_embeddings",
    "save_embeddings",
    "top_k",
    "rank_similar",
    "MockGenerator",
    "EvaluationReport",
    "evaluate_ranker",
    "make_scorer",
]

NORM_TOLERANCE = 1e-6


class RankerError(Exception):
    pass


class EmptyPool(RankerError):
    pass


class EmbeddingMissing(RankerError):
    pass


class EmbeddingFormatError(RankerError):
    """Store file is structurally broken (bad header, bad row, bad count)."""


class DimMismatch(EmbeddingFormatError):
    pass


class NotNormalized(EmbeddingFormatError):
    pass


@dataclass(frozen=True)
class RankedResult:
    record_id: str
    score: float
    rank: int  # 1-based


class Scorer(Protocol):
    name: str

    def score_pool(
        self, statement: str, pool: Sequence[TheoremRecord]
    ) -> list[float]: ...


class JaccardScorer:
    name = "jaccard"

    def score_pool(
        self, statement: str, pool: Sequence[TheoremRecord]
    ) -> list[float]:
        target = set(tokenize_statement(statement))
        scores = []
        for candidate in pool:
            tokens = set(tokenize_statement(candidate.statement_text))
            if not target and not tokens:
                scores.append(1.0)
            elif not target or not tokens:
                scores.append(0.0)
            else:
                scores.append(len(target & tokens) / len(target | tokens))
        return scores


class Bm25Scorer:
    """BM25 with document statistics taken from the candidate pool itself."""

    name = "bm25"

    def score_pool(
        self, statement: str, pool: Sequence[TheoremRecord]
    ) -> list[float]:
        docs = [tokenize_statement(c.statement_text) for c in pool]
        index = Bm25Index(docs)
        return index.scores(tokenize_statement(statement))


# ---------------------------------------------------------------------------
# Embedding store


def _statement_key(statement: str) -> str:
    return hashlib.sha256(" ".join(statement.split()).encode("utf-8")).hexdigest()


class EmbeddingStore:
    """Unit-norm vectors keyed by record id, with an optional statement-text
    index so service queries can look up targets by statement."""

    def __init__(self, dim: int):
        self.dim = dim
        self._vectors: dict[str, np.ndarray] = {}
        self._by_statement: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._vectors

    def ids(self) -> list[str]:
        return sorted(self._vectors)

    def add(self, record_id: str, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise DimMismatch(
                f"vector for {record_id} has dim {vec.shape}, store dim {self.dim}"
            )
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NotNormalized(f"vector for {record_id} has norm {norm}")
        if record_id in self._vectors:
            raise EmbeddingFormatError(f"duplicate id {record_id}")
        self._vectors[record_id] = vec

    def vector_for_id(self, record_id: str) -> Optional[np.ndarray]:
        return self._vectors.get(record_id)

    def attach_corpus(self, corpus: Corpus) -> None:
        """Index stored vectors by their records' statement text (sorted ids,
        first statement occurrence wins) for statement-keyed lookups."""
        for record_id in self.ids():
            record = corpus.get(record_id)
            if record is None:
                continue
            key = _statement_key(record.statement_text)
            self._by_statement.setdefault(key, record_id)

    def vector_for_statement(self, statement: str) -> Optional[np.ndarray]:
        record_id = self._by_statement.get(_statement_key(statement))
        if record_id is None:
            return None
        return self._vectors[record_id]

    def view_for_corpus(self, corpus: Corpus) -> "EmbeddingStore":
        """A store sharing this one's vectors but with a statement index built
        for the given corpus only (vectors are never mutated after load, so
        sharing is safe)."""
        view = EmbeddingStore(self.dim)
        view._vectors = self._vectors
        view.attach_corpus(corpus)
        return view


def load_embeddings(path_or_text: str | Path) -> EmbeddingStore:
    """Read a store file: a JSON-lines header ``{"dim", "count"}`` followed by
    one ``{"id", "vector"}`` row per record. Raises DimMismatch, NotNormalized
    (naming the offending id), or EmbeddingFormatError on structural problems.
    """
    if isinstance(path_or_text, Path):
        text = path_or_text.read_text(encoding="utf-8")
    elif "\n" not in path_or_text and Path(path_or_text).exists():
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise EmbeddingFormatError("empty store file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise EmbeddingFormatError(f"bad header: {exc}") from exc
    if (
        not isinstance(header, dict)
        or not isinstance(header.get("dim"), int)
        or not isinstance(header.get("count"), int)
        or header["dim"] < 1
    ):
        raise EmbeddingFormatError(f"bad header: {lines[0]!r}")
    store = EmbeddingStore(dim=header["dim"])
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EmbeddingFormatError(f"line {lineno}: not JSON: {exc}") from exc
        if (
            not isinstance(row, dict)
            or not isinstance(row.get("id"), str)
            or not isinstance(row.get("vector"), list)
        ):
            raise EmbeddingFormatError(f"line {lineno}: bad row shape")
        vector = np.asarray(row["vector"], dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != header["dim"]:
            raise DimMismatch(
                f"line {lineno}: {row['id']} has dim {vector.shape[0] if vector.ndim == 1 else vector.shape}, "
                f"header says {header['dim']}"
            )
        store.add(row["id"], vector)
    if len(store) != header["count"]:
        raise EmbeddingFormatError(
            f"header count {header['count']} != {len(store)} rows"
        )
    return store


def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write the JSON-lines store format (header first, rows by sorted id)."""
    out = Path(path)
    lines = [json.dumps({"dim": store.dim, "count": len(store)})]
    for record_id in store.ids():
        vector = store.vector_for_id(record_id)
        lines.append(
            json.dumps({"id": record_id, "vector": [float(x) for x in vector]})
        )
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


class EmbeddingScorer:
    """Cosine similarity against stored vectors (dot product; all unit norm).

    A missing target or candidate vector raises EmbeddingMissing naming the
    gap, unless a fallback scorer was given, in which case the whole query is
    scored by the fallback so the ranking stays internally consistent.
    """

    name = "embedding"

    def __init__(self, store: EmbeddingStore, fallback: Optional[Scorer] = None):
        self.store = store
        self.fallback = fallback

    def score_pool(
        self, statement: str, pool: Sequence[TheoremRecord]
    ) -> list[float]:
        target = self.store.vector_for_statement(statement)
        if target is None:
            if self.fallback is not None:
                return self.fallback.score_pool(statement, pool)
            raise EmbeddingMissing(
                f"no embedding for target statement {statement[:60]!r}"
            )
        scores: list[float] = []
        missing: list[str] = []
        for candidate in pool:
            vec = self.store.vector_for_id(candidate.id)
            if vec is None:
                missing.append(candidate.id)
                scores.append(0.0)
            else:
                scores.append(float(target @ vec))
        if missing:
            if self.fallback is not None:
                return self.fallback.score_pool(statement, pool)
            raise EmbeddingMissing(
                f"no embedding for candidate(s) {', '.join(missing[:5])}"
            )
        return scores


def make_scorer(
    name: str,
    store: Optional[EmbeddingStore] = None,
    fallback_to_jaccard: bool = False,
) -> Scorer:
    if name == "jaccard":
        return JaccardScorer()
    if name == "bm25":
        return Bm25Scorer()
    if name == "embedding":
        if store is None:
            raise EmbeddingMissing("embedding scorer requested but no store loaded")
        return EmbeddingScorer(
            store, fallback=JaccardScorer() if fallback_to_jaccard else None
        )
    raise ValueError(f"unknown scorer {name!r}")


# ---------------------------------------------------------------------------
# Retrieval


def top_k(
    scorer: Scorer,
    statement: str,
    pool: Sequence[TheoremRecord],
    k: int,
) -> list[RankedResult]:
    """Rank the pool against the statement and return the best k (fewer when
    the pool is smaller). Ties break by ascending record id; scores along the
    returned list never increase. The target must already be excluded from the
    pool; an empty pool raises EmptyPool."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not pool:
        raise EmptyPool("candidate pool is empty")
    scores = scorer.score_pool(statement, pool)
    order = sorted(range(len(pool)), key=lambda i: (-scores[i], pool[i].id))
    return [
        RankedResult(record_id=pool[i].id, score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order[:k], start=1)
    ]


def rank_similar(
    corpus: Corpus,
    target: TheoremRecord,
    scorer: Scorer,
    k: int,
) -> list[RankedResult]:
    """top_k over the target's same-file pool (the default candidate set)."""
    return top_k(scorer, target.statement_text, corpus.same_file_pool(target), k)


# ---------------------------------------------------------------------------
# Evaluation with a mock generator


class MockGenerator:
    """Stands in for a proof generator: a target counts as solved when some
    retrieved proof lies within ``delta`` of the target's proof under the
    noise-free distance."""

    def __init__(self, delta: float = 0.3, params: DistanceParams = DistanceParams()):
        self.delta = delta
        self.params = params.noiseless()

    def min_distance(
        self, target: TheoremRecord, retrieved: Sequence[TheoremRecord]
    ) -> float:
        if not retrieved:
            return 1.0
        return min(
            proof_distance(target.proof, r.proof, self.params) for r in retrieved
        )

    def solves(
        self, target: TheoremRecord, retrieved: Sequence[TheoremRecord]
    ) -> bool:
        return self.min_distance(target, retrieved) <= self.delta


@dataclass(frozen=True)
class EvaluationReport:
    scorer: str
    k: int
    delta: float
    n_targets: int
    solve_rate: float
    mean_min_distance: float

    def to_obj(self) -> dict:
        return {
            "scorer": self.scorer,
            "k": self.k,
            "delta": self.delta,
            "n_targets": self.n_targets,
            "solve_rate": self.solve_rate,
            "mean_min_distance": self.mean_min_distance,
        }


def evaluate_ranker(
    corpus: Corpus,
    scorer: Scorer,
    k: int = 7,
    generator: Optional[MockGenerator] = None,
) -> EvaluationReport:
    """Retrieve k candidates for every record with a non-empty same-file pool
    and report the solve rate plus the mean best retrieved-proof distance."""
    generator = generator or MockGenerator()
    n_targets = 0
    solved = 0
    total_min = 0.0
    for target in corpus.records():
        pool = corpus.same_file_pool(target)
        if not pool:
            continue
        results = top_k(scorer, target.statement_text, pool, k)
        retrieved = [corpus.get(r.record_id) for r in results]
        n_targets += 1
        best = generator.min_distance(target, retrieved)
        total_min += best
        if best <= generator.delta:
            solved += 1
    if n_targets == 0:
        raise EmptyPool("no target has a non-empty same-file pool")
    return EvaluationReport(
        scorer=getattr(scorer, "name", type(scorer).__name__),
        k=k,
        delta=generator.delta,
        n_targets=n_targets,
        solve_rate=solved / n_targets,
        mean_min_distance=total_min / n_targets,
    )
