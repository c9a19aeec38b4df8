"""Correlation analysis between statement similarity and proof distance.

The experiment walks every unordered pair once, scoring statements with a
pluggable similarity and proofs with the noise-free distance, then reports
Pearson and Spearman coefficients plus a 20-bin distance histogram. All
accumulation uses exactly-rounded summation, so results are independent of
pair evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .corpus import Corpus
from .metrics import Bm25Index, DistanceParams
from .parsing import TheoremRecord, tokenize_statement
from .pairs import all_pair_distances

__all__ = [
    "DegenerateInput",
    "pearson",
    "spearman",
    "average_ranks",
    "PairScorer",
    "JaccardPairScorer",
    "Bm25PairScorer",
    "CorrelationReport",
    "correlation_experiment",
]

HISTOGRAM_BINS = 20


class DegenerateInput(Exception):
    pass


def _check(xs: Sequence[float], ys: Sequence[float]) -> None:
    if len(xs) != len(ys):
        raise DegenerateInput(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateInput(f"need at least 2 observations, got {len(xs)}")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation via centered exact sums. Raises DegenerateInput on
    fewer than two observations or zero variance in either argument."""
    _check(xs, ys)
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateInput("zero variance input")
    cov = math.fsum(a * b for a, b in zip(dx, dy))
    return cov / math.sqrt(var_x * var_y)


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing their mean rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson over mean ranks (tie-safe)."""
    _check(xs, ys)
    return pearson(average_ranks(xs), average_ranks(ys))


# ---------------------------------------------------------------------------
# Statement pair scorers


class PairScorer(Protocol):
    name: str

    def similarity(self, a: TheoremRecord, b: TheoremRecord) -> float: ...


class JaccardPairScorer:
    name = "jaccard"

    def __init__(self, records: Sequence[TheoremRecord]):
        self._tokens = {
            r.id: set(tokenize_statement(r.statement_text)) for r in records
        }

    def similarity(self, a: TheoremRecord, b: TheoremRecord) -> float:
        sa = self._tokens[a.id]
        sb = self._tokens[b.id]
        if not sa and not sb:
            return 1.0
        return len(sa & sb) / len(sa | sb)


class Bm25PairScorer:
    """Symmetric pairwise score: the mean of the two directed BM25 scores over
    an index of all statements (BM25 itself is query-vs-document)."""

    name = "bm25"

    def __init__(self, records: Sequence[TheoremRecord]):
        self._index_of = {r.id: i for i, r in enumerate(records)}
        self._tokens = [tokenize_statement(r.statement_text) for r in records]
        self._index = Bm25Index(self._tokens)

    def similarity(self, a: TheoremRecord, b: TheoremRecord) -> float:
        ia = self._index_of[a.id]
        ib = self._index_of[b.id]
        forward = self._index.score(self._tokens[ia], ib)
        backward = self._index.score(self._tokens[ib], ia)
        return (forward + backward) / 2.0


def make_pair_scorer(name: str, records: Sequence[TheoremRecord]) -> PairScorer:
    if name == "jaccard":
        return JaccardPairScorer(records)
    if name == "bm25":
        return Bm25PairScorer(records)
    raise ValueError(f"unknown statement scorer {name!r}")


# ---------------------------------------------------------------------------
# Experiment


@dataclass(frozen=True)
class CorrelationReport:
    scorer: str
    n_records: int
    n_pairs: int
    pearson_r: float
    spearman_rho: float
    histogram: tuple[tuple[float, int], ...]  # (bin lower edge, count)

    def to_obj(self) -> dict:
        return {
            "scorer": self.scorer,
            "n_records": self.n_records,
            "n_pairs": self.n_pairs,
            "pearson_r": self.pearson_r,
            "spearman_rho": self.spearman_rho,
            "histogram": [
                {"lower": lower, "count": count} for lower, count in self.histogram
            ],
        }

    def table(self) -> str:
        lines = [
            f"scorer          {self.scorer}",
            f"records         {self.n_records}",
            f"pairs           {self.n_pairs}",
            f"pearson_r       {self.pearson_r:+.4f}",
            f"spearman_rho    {self.spearman_rho:+.4f}",
            "distance histogram (bin lower edge, count)",
        ]
        peak = max((count for _, count in self.histogram), default=1)
        for lower, count in self.histogram:
            bar = "#" * (round(40 * count / peak) if peak else 0)
            lines.append(f"  {lower:4.2f} {count:>10d} {bar}")
        return "\n".join(lines)


def distance_histogram(distances: Sequence[float]) -> tuple[tuple[float, int], ...]:
    """Fixed 20-bin histogram over [0, 1]; 1.0 falls in the last bin."""
    counts = [0] * HISTOGRAM_BINS
    for d in distances:
        idx = int(d * HISTOGRAM_BINS)
        if idx >= HISTOGRAM_BINS:
            idx = HISTOGRAM_BINS - 1
        counts[idx] += 1
    return tuple((i / HISTOGRAM_BINS, counts[i]) for i in range(HISTOGRAM_BINS))


def correlation_experiment(
    corpus: Corpus | Sequence[TheoremRecord],
    scorer: str | PairScorer = "jaccard",
    params: DistanceParams = DistanceParams(),
) -> CorrelationReport:
    """Correlate statement similarity with noise-free proof distance over all
    unordered pairs. Needs at least 2 records and non-constant columns."""
    if isinstance(corpus, Corpus):
        records = corpus.records()
    else:
        records = sorted(corpus, key=lambda r: r.id)
    if isinstance(scorer, str):
        scorer = make_pair_scorer(scorer, records)
    by_id = {r.id: r for r in records}
    sims: list[float] = []
    dists: list[float] = []
    for left, right, distance in all_pair_distances(records, params.noiseless()):
        sims.append(scorer.similarity(by_id[left], by_id[right]))
        dists.append(distance)
    if not sims:
        raise DegenerateInput("no pairs: corpus has fewer than 2 records")
    return CorrelationReport(
        scorer=scorer.name,
        n_records=len(records),
        n_pairs=len(sims),
        pearson_r=pearson(sims, dists),
        spearman_rho=spearman(sims, dists),
        histogram=distance_histogram(dists),
    )
