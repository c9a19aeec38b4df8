"""Proof-aware distances and statement similarity scores.

Proof distance blends an edit channel with a set channel: a tactic-level
Levenshtein distance whose substitution cost is the normalized character-level
edit distance between the two tactic texts, and a Jaccard distance over the
sets of tactic texts. Both metrics ignore bullet/brace markers; they compare
the commands themselves. A small uniform jitter decorrelates exact ties when a
caller asks for it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .parsing import TacticSequence

__all__ = [
    "DistanceParams",
    "char_levenshtein",
    "tactic_substitution_cost",
    "proof_levenshtein",
    "jaccard_proof_distance",
    "proof_distance",
    "jaccard_statement_similarity",
    "Bm25Params",
    "Bm25Index",
    "bm25_scores",
]


def char_levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance between two strings."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) > len(a):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(
                min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
            )
        prev = cur
    return prev[len(b)]


def tactic_substitution_cost(a: str, b: str) -> float:
    """char_levenshtein(a, b) / max(len(a), len(b)); 0 when both are empty.
    Always in [0, 1], and 0 exactly for identical texts."""
    if a == b:
        return 0.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return char_levenshtein(a, b) / longest


SubstCost = Callable[[str, str], float]


def _texts(seq: TacticSequence | Sequence[str]) -> list[str]:
    if isinstance(seq, TacticSequence):
        return seq.texts()
    return list(seq)


def proof_levenshtein(
    a: TacticSequence | Sequence[str],
    b: TacticSequence | Sequence[str],
    subst: SubstCost = tactic_substitution_cost,
) -> float:
    """Tactic-level edit distance, normalized by the longer proof's length.

    Insertions and deletions cost 1; substituting tactic s for t costs
    ``subst(s, t)`` (0 for identical texts regardless of ``subst``). Two empty
    proofs are at distance 0; anything against an empty proof is at 1.
    """
    xs = _texts(a)
    ys = _texts(b)
    n, m = len(xs), len(ys)
    if n == 0 and m == 0:
        return 0.0
    if n == 0 or m == 0:
        return 1.0
    prev = [float(j) for j in range(m + 1)]
    for i in range(1, n + 1):
        xi = xs[i - 1]
        cur = [float(i)]
        for j in range(1, m + 1):
            yj = ys[j - 1]
            cost = 0.0 if xi == yj else subst(xi, yj)
            cur.append(min(prev[j] + 1.0, cur[j - 1] + 1.0, prev[j - 1] + cost))
        prev = cur
    return prev[m] / max(n, m)


def jaccard_proof_distance(
    a: TacticSequence | Sequence[str], b: TacticSequence | Sequence[str]
) -> float:
    """1 − Jaccard overlap of the two proofs' tactic-text sets (0 when both
    are empty)."""
    sa = set(_texts(a))
    sb = set(_texts(b))
    if not sa and not sb:
        return 0.0
    return 1.0 - len(sa & sb) / len(sa | sb)


@dataclass(frozen=True)
class DistanceParams:
    """Blend weight and jitter amplitude for proof_distance.

    ``noise_amplitude`` must stay well below the labeling thresholds; values
    at or above 0.01 are rejected.
    """

    alpha: float = 0.7
    noise_amplitude: float = 1e-3

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.noise_amplitude < 0.01:
            raise ValueError(
                f"noise_amplitude must be in [0, 0.01), got {self.noise_amplitude}"
            )

    def noiseless(self) -> "DistanceParams":
        return DistanceParams(alpha=self.alpha, noise_amplitude=0.0)


def proof_distance(
    a: TacticSequence | Sequence[str],
    b: TacticSequence | Sequence[str],
    params: DistanceParams = DistanceParams(),
    rng: Optional[random.Random] = None,
) -> float:
    """alpha * edit channel + (1 - alpha) * set channel + jitter, clamped to
    [0, 1]. With amplitude 0 no rng is consumed and the result is exact."""
    value = params.alpha * proof_levenshtein(a, b) + (
        1.0 - params.alpha
    ) * jaccard_proof_distance(a, b)
    if params.noise_amplitude > 0.0:
        if rng is None:
            raise ValueError("noise_amplitude > 0 requires an rng")
        value += rng.uniform(-params.noise_amplitude, params.noise_amplitude)
    return min(1.0, max(0.0, value))


def jaccard_statement_similarity(
    tokens_a: Sequence[str], tokens_b: Sequence[str]
) -> float:
    """Jaccard overlap of two token multisets' underlying sets; two empty
    statements count as identical (similarity 1)."""
    sa = set(tokens_a)
    sb = set(tokens_b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


# ---------------------------------------------------------------------------
# Okapi BM25


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75


class Bm25Index:
    """Okapi BM25 over tokenized documents.

    idf(t) = ln((N - n_t + 0.5) / (n_t + 0.5) + 1), which stays positive for
    terms present in every document. Query tokens contribute once per
    occurrence, so repeated terms weigh more.
    """

    def __init__(self, docs: Sequence[Sequence[str]], params: Bm25Params = Bm25Params()):
        self.params = params
        self._tfs: list[dict[str, int]] = []
        self._lengths: list[int] = []
        df: dict[str, int] = {}
        for doc in docs:
            tf: dict[str, int] = {}
            for tok in doc:
                tf[tok] = tf.get(tok, 0) + 1
            self._tfs.append(tf)
            self._lengths.append(len(doc))
            for tok in tf:
                df[tok] = df.get(tok, 0) + 1
        n_docs = len(self._tfs)
        self._avgdl = sum(self._lengths) / n_docs if n_docs else 0.0
        self._idf = {
            tok: math.log((n_docs - n + 0.5) / (n + 0.5) + 1.0)
            for tok, n in df.items()
        }

    def __len__(self) -> int:
        return len(self._tfs)

    def score(self, query: Sequence[str], doc_index: int) -> float:
        tf = self._tfs[doc_index]
        dl = self._lengths[doc_index]
        k1, b = self.params.k1, self.params.b
        if self._avgdl > 0.0:
            norm = k1 * (1.0 - b + b * dl / self._avgdl)
        else:
            norm = k1
        total = 0.0
        for tok in query:
            freq = tf.get(tok)
            if not freq:
                continue
            total += self._idf[tok] * freq * (k1 + 1.0) / (freq + norm)
        return total

    def scores(self, query: Sequence[str]) -> list[float]:
        return [self.score(query, i) for i in range(len(self._tfs))]


def bm25_scores(
    query: Sequence[str],
    docs: Sequence[Sequence[str]],
    params: Bm25Params = Bm25Params(),
) -> list[float]:
    """Score every document against the query. The corpus must be non-empty
    (document-frequency statistics are undefined otherwise)."""
    if not docs:
        raise ValueError("bm25 needs a non-empty document corpus")
    return Bm25Index(docs, params).scores(query)
