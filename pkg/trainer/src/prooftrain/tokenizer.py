"""Byte-pair subword tokenizer trained on the statement corpus.

The vocabulary starts from the single characters that occur in the training
text (each word carries an end-of-word marker) and greedily merges the most
frequent adjacent symbol pair until the merge budget is exhausted or no pair
occurs twice. Ties on frequency break lexicographically so training is
deterministic for a given corpus.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional, Sequence

PAD_ID = 0
UNK_ID = 1

_WORD_END = "</w>"


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word) + (_WORD_END,)


def _count_pairs(words: dict[tuple[str, ...], int]) -> Counter:
    pairs: Counter = Counter()
    for symbols, freq in words.items():
        for a, b in zip(symbols, symbols[1:]):
            pairs[(a, b)] += freq
    return pairs


def _merge_word(
    symbols: tuple[str, ...], pair: tuple[str, str], joined: str
) -> tuple[str, ...]:
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


class BpeTokenizer:
    """Learned merge table plus the symbol vocabulary it induces."""

    def __init__(self, merges: Sequence[tuple[str, str]], alphabet: Sequence[str]):
        self.merges = [tuple(m) for m in merges]
        self.alphabet = list(alphabet)
        self._ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        symbols = list(self.alphabet) + ["".join(pair) for pair in self.merges]
        self.vocab: dict[str, int] = {}
        next_id = 2  # 0 and 1 are reserved for padding and unknowns
        for symbol in symbols:
            if symbol not in self.vocab:
                self.vocab[symbol] = next_id
                next_id += 1
        self._cache: dict[str, tuple[str, ...]] = {}

    @classmethod
    def train(cls, texts: Iterable[str], max_merges: int = 8000) -> "BpeTokenizer":
        """Learn up to ``max_merges`` merges from the given statements."""
        if max_merges < 0:
            raise ValueError(f"max_merges must be >= 0, got {max_merges}")
        words: dict[tuple[str, ...], int] = {}
        alphabet: set[str] = {_WORD_END}
        for text in texts:
            for word in text.split():
                alphabet.update(word)
                key = _word_symbols(word)
                words[key] = words.get(key, 0) + 1
        merges: list[tuple[str, str]] = []
        while len(merges) < max_merges:
            pairs = _count_pairs(words)
            if not pairs:
                break
            best = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
            pair, freq = best
            if freq < 2:
                break
            merges.append(pair)
            joined = "".join(pair)
            words = {
                _merge_word(symbols, pair, joined): count
                for symbols, count in words.items()
            }
        return cls(merges, sorted(alphabet))

    def vocab_size(self) -> int:
        return 2 + len(self.vocab)

    def _segment(self, word: str) -> tuple[str, ...]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = _word_symbols(word)
        while len(symbols) > 1:
            ranked = [
                (self._ranks[pair], pair)
                for pair in zip(symbols, symbols[1:])
                if pair in self._ranks
            ]
            if not ranked:
                break
            _, pair = min(ranked)
            symbols = _merge_word(symbols, pair, "".join(pair))
        self._cache[word] = symbols
        return symbols

    def encode(self, text: str, max_len: Optional[int] = None) -> list[int]:
        """Token ids for a statement, truncated to ``max_len`` when given.

        Symbols outside the vocabulary map to the unknown id; an empty
        statement encodes as a single unknown token so downstream pooling
        always has something to average.
        """
        ids: list[int] = []
        for word in text.split():
            for symbol in self._segment(word):
                ids.append(self.vocab.get(symbol, UNK_ID))
            if max_len is not None and len(ids) >= max_len:
                break
        if not ids:
            ids = [UNK_ID]
        if max_len is not None:
            ids = ids[:max_len]
        return ids

    def to_obj(self) -> dict:
        return {
            "merges": [list(pair) for pair in self.merges],
            "alphabet": list(self.alphabet),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "BpeTokenizer":
        return cls(
            [tuple(pair) for pair in obj["merges"]],
            list(obj["alphabet"]),
        )
