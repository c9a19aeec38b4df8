"""Corpus container and its on-disk JSON schema.

A corpus directory holds one JSON file per source file under ``corpus/``, each
an array of record objects with the keys id, file, name, kind, statement,
proof, origin, has_goal_selectors. Proof entries are rendered tactic strings
(markers inlined), so a record round-trips through the tactic splitter.
All writes are deterministic: fixed key order, sorted records, no timestamps.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .parsing import (
    RecordOrigin,
    SourceFile,
    TacticSequence,
    TheoremKind,
    TheoremRecord,
    parse_file,
    split_tactics,
    Diagnostic,
)

__all__ = ["Corpus", "record_to_obj", "record_from_obj", "corpus_filename"]


def record_to_obj(record: TheoremRecord) -> dict:
    return {
        "id": record.id,
        "file": record.file,
        "name": record.name,
        "kind": record.kind.value,
        "statement": record.statement_text,
        "proof": [t.render() for t in record.proof],
        "origin": record.origin.value,
        "has_goal_selectors": record.has_goal_selectors,
    }


def record_from_obj(obj: dict) -> TheoremRecord:
    proof = split_tactics(" ".join(obj["proof"]))
    return TheoremRecord(
        id=obj["id"],
        file=obj["file"],
        name=obj["name"],
        kind=TheoremKind(obj["kind"]),
        statement_text=obj["statement"],
        proof=proof,
        origin=RecordOrigin(obj["origin"]),
        has_goal_selectors=bool(obj["has_goal_selectors"]),
    )


def corpus_filename(path: str) -> str:
    """Deterministic, collision-free file name for a source path."""
    safe = path.replace("\\", "/").strip("/").replace("/", "__")
    digest = hashlib.sha1(path.encode("utf-8")).hexdigest()[:8]
    return f"{safe}.{digest}.json"


class Corpus:
    """An id-indexed set of theorem records grouped by source file."""

    def __init__(self, records: Iterable[TheoremRecord] = ()):
        self._records: dict[str, TheoremRecord] = {}
        for record in records:
            self.add(record)

    def add(self, record: TheoremRecord) -> None:
        if record.id in self._records:
            raise ValueError(f"duplicate record id {record.id}")
        self._records[record.id] = record

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[TheoremRecord]:
        return iter(self.records())

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._records

    def get(self, record_id: str) -> Optional[TheoremRecord]:
        return self._records.get(record_id)

    def records(self) -> list[TheoremRecord]:
        return [self._records[rid] for rid in sorted(self._records)]

    def files(self) -> dict[str, list[TheoremRecord]]:
        out: dict[str, list[TheoremRecord]] = {}
        for record in self.records():
            out.setdefault(record.file, []).append(record)
        return dict(sorted(out.items()))

    def same_file_pool(self, target: TheoremRecord) -> list[TheoremRecord]:
        return [
            r for r in self.files().get(target.file, []) if r.id != target.id
        ]

    @classmethod
    def from_sources(
        cls, sources: Iterable[SourceFile]
    ) -> tuple["Corpus", list[Diagnostic]]:
        corpus = cls()
        diagnostics: list[Diagnostic] = []
        for source in sources:
            records, diags = parse_file(source)
            diagnostics.extend(diags)
            for record in records:
                corpus.add(record)
        return corpus, diagnostics

    def save(self, directory: str | Path) -> list[Path]:
        """Write corpus/<file>.json files; returns the paths written."""
        root = Path(directory) / "corpus"
        root.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        for file, records in self.files().items():
            payload = [record_to_obj(r) for r in records]
            out = root / corpus_filename(file)
            out.write_text(
                json.dumps(payload, indent=1, ensure_ascii=True) + "\n",
                encoding="utf-8",
            )
            written.append(out)
        return written

    @classmethod
    def load(cls, directory: str | Path) -> "Corpus":
        root = Path(directory)
        if (root / "corpus").is_dir():
            root = root / "corpus"
        corpus = cls()
        for path in sorted(root.glob("*.json")):
            for obj in json.loads(path.read_text(encoding="utf-8")):
                corpus.add(record_from_obj(obj))
        return corpus
