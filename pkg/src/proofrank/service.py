"""REST service over in-memory corpora.

Corpus builds are asynchronous: POST /v1/corpora answers 202 with a handle
and a worker thread flips the handle to ready; every other endpoint rejects
handles that are not ready yet with 409. Original records are frozen at build
time; mining results are stored per (mode, k) key so reads stay stable.

Status codes: 400 malformed body, 404 unknown corpus, 409 corpus not ready,
422 for semantically invalid requests (zero theorems, bad thresholds, missing
embeddings), 429 when the corpus limit is reached.
"""

from __future__ import annotations

import io
import json
import threading
import uuid
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .analysis import DegenerateInput, correlation_experiment
from .corpus import Corpus
from .metrics import DistanceParams
from .pairs import MiningConfig, TooFewFiles, build_dataset
from .parsing import Diagnostic, SourceFile, TheoremRecord
from .ranking import (
    EmbeddingMissing,
    EmbeddingFormatError,
    EmbeddingStore,
    EmptyPool,
    load_embeddings,
    make_scorer,
    top_k,
)
from .treemine import (
    GoalSelectorUnsupported,
    KOutOfRange,
    MalformedBullets,
    mine_after_k,
    mine_subproofs,
    mined_to_record,
)

DEFAULT_PORT = 7711
DEFAULT_SIMILAR_K = 15


class CorpusState(Enum):
    BUILDING = "building"
    READY = "ready"
    FAILED = "failed"


@dataclass
class CorpusHandle:
    corpus_id: str
    state: CorpusState = CorpusState.BUILDING
    corpus: Optional[Corpus] = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    error: Optional[str] = None
    mined: dict[tuple[str, Optional[int]], list[TheoremRecord]] = field(
        default_factory=dict
    )
    store: Optional[EmbeddingStore] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def describe(self) -> dict:
        out: dict[str, Any] = {
            "corpus_id": self.corpus_id,
            "state": self.state.value,
            "diagnostics": [str(d) for d in self.diagnostics],
        }
        if self.corpus is not None:
            out["n_records"] = len(self.corpus)
            out["n_files"] = len(self.corpus.files())
        if self.mined:
            out["mined"] = {
                _mine_key_name(key): len(records)
                for key, records in sorted(self.mined.items(), key=str)
            }
        if self.error is not None:
            out["error"] = self.error
        out["has_embeddings"] = self.store is not None
        return out


def _mine_key_name(key: tuple[str, Optional[int]]) -> str:
    mode, k = key
    return mode if k is None else f"{mode}[k={k}]"


class _ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


def _ranked_payload(corpus: Corpus, results) -> list[dict]:
    payload = []
    for item in results:
        record = corpus.get(item.record_id)
        payload.append(
            {
                "id": item.record_id,
                "name": record.name if record else None,
                "statement": record.statement_text if record else None,
                "proof": [t.render() for t in record.proof] if record else None,
                "score": item.score,
                "rank": item.rank,
            }
        )
    return payload


def create_app(
    max_corpora: int = 16,
    data_dir: Optional[str] = None,
    embeddings_path: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="proofrank", version=__version__)
    registry: dict[str, CorpusHandle] = {}
    registry_lock = threading.Lock()
    data_root = Path(data_dir) if data_dir else None
    shared_store: Optional[EmbeddingStore] = None
    if embeddings_path:
        shared_store = load_embeddings(Path(embeddings_path))

    @app.exception_handler(_ApiError)
    async def api_error_handler(_request: Request, exc: _ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    def get_handle(corpus_id: str) -> CorpusHandle:
        with registry_lock:
            handle = registry.get(corpus_id)
        if handle is None:
            raise _ApiError(404, f"unknown corpus {corpus_id}")
        return handle

    def get_ready(corpus_id: str) -> CorpusHandle:
        handle = get_handle(corpus_id)
        if handle.state is not CorpusState.READY:
            raise _ApiError(
                409, f"corpus {corpus_id} is {handle.state.value}, not ready"
            )
        return handle

    async def read_sources(request: Request) -> list[SourceFile]:
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/zip"):
            body = await request.body()
            try:
                archive = zipfile.ZipFile(io.BytesIO(body))
                return [
                    SourceFile(name, archive.read(name).decode("utf-8"))
                    for name in sorted(archive.namelist())
                    if name.endswith(".v")
                ]
            except (zipfile.BadZipFile, UnicodeDecodeError) as exc:
                raise _ApiError(400, f"bad archive: {exc}") from exc
        try:
            body_json = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise _ApiError(400, f"body is not JSON: {exc}") from exc
        files = body_json.get("files") if isinstance(body_json, dict) else None
        if not isinstance(files, list) or not files:
            raise _ApiError(400, "body must be {'files': [{'path', 'content'}, ...]}")
        sources = []
        for entry in files:
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("path"), str)
                or not isinstance(entry.get("content"), str)
            ):
                raise _ApiError(400, "each file needs string 'path' and 'content'")
            sources.append(SourceFile(entry["path"], entry["content"]))
        return sources

    @app.get("/health")
    async def health():
        with registry_lock:
            count = len(registry)
        return {"status": "ok", "version": __version__, "corpora_count": count}

    @app.post("/v1/corpora", status_code=202)
    async def create_corpus(request: Request):
        sources = await read_sources(request)
        with registry_lock:
            if len(registry) >= max_corpora:
                raise _ApiError(429, f"corpus limit {max_corpora} reached")
            corpus_id = f"c-{uuid.uuid4().hex[:12]}"
            handle = CorpusHandle(corpus_id=corpus_id)
            registry[corpus_id] = handle

        # cheap synchronous parse so an empty submission fails fast with 422
        corpus, diagnostics = Corpus.from_sources(sources)
        if len(corpus) == 0:
            with registry_lock:
                del registry[corpus_id]
            raise _ApiError(422, "no theorems parsed from the submitted files")

        def finish() -> None:
            with handle.lock:
                handle.corpus = corpus
                handle.diagnostics = diagnostics
                if shared_store is not None:
                    handle.store = shared_store.view_for_corpus(corpus)
                handle.state = CorpusState.READY

        threading.Thread(target=finish, daemon=True).start()
        return {"corpus_id": corpus_id, "state": handle.state.value}

    @app.get("/v1/corpora/{corpus_id}")
    async def describe_corpus(corpus_id: str):
        return get_handle(corpus_id).describe()

    @app.post("/v1/corpora/{corpus_id}/similar")
    async def similar(corpus_id: str, request: Request):
        handle = get_ready(corpus_id)
        body = await _json_body(request)
        statement = body.get("statement")
        if not isinstance(statement, str) or not statement.strip():
            raise _ApiError(400, "body needs a non-empty 'statement'")
        k = body.get("k", DEFAULT_SIMILAR_K)
        if not isinstance(k, int) or k < 1:
            raise _ApiError(400, f"k must be a positive integer, got {k!r}")
        scorer_name = body.get("scorer", "jaccard")
        if scorer_name not in ("jaccard", "bm25", "embedding"):
            raise _ApiError(400, f"unknown scorer {scorer_name!r}")
        fallback = bool(body.get("fallback", False))
        corpus = handle.corpus
        file_filter = body.get("file")
        if file_filter is not None:
            pool = [r for r in corpus.records() if r.file == file_filter]
        else:
            pool = corpus.records()
        try:
            scorer = make_scorer(
                scorer_name, store=handle.store, fallback_to_jaccard=fallback
            )
            results = top_k(scorer, statement, pool, k)
        except (EmbeddingMissing, EmptyPool) as exc:
            raise _ApiError(422, str(exc)) from exc
        return _ranked_payload(corpus, results)

    @app.post("/v1/corpora/{corpus_id}/mine")
    async def mine(corpus_id: str, request: Request):
        handle = get_ready(corpus_id)
        body = await _json_body(request)
        mode = body.get("mode", "subproofs")
        if mode not in ("subproofs", "after_k"):
            raise _ApiError(400, f"mode must be 'subproofs' or 'after_k', got {mode!r}")
        k = body.get("k")
        if mode == "after_k" and not isinstance(k, int):
            raise _ApiError(400, "mode 'after_k' requires integer 'k'")
        if mode == "subproofs":
            k = None
        corpus = handle.corpus
        mined_records: list[TheoremRecord] = []
        skipped_selectors = 0
        failed = 0
        for record in corpus.records():
            try:
                if mode == "subproofs":
                    mined = mine_subproofs(record)
                else:
                    mined = [mine_after_k(record, k)]
            except GoalSelectorUnsupported:
                skipped_selectors += 1
                continue
            except (MalformedBullets, KOutOfRange):
                failed += 1
                continue
            mined_records.extend(mined_to_record(m, record) for m in mined)
        with handle.lock:
            handle.mined[(mode, k)] = mined_records
        return {
            "mode": mode,
            "k": k,
            "n_sources": len(corpus),
            "n_mined": len(mined_records),
            "n_skipped_goal_selectors": skipped_selectors,
            "n_failed": failed,
        }

    @app.post("/v1/corpora/{corpus_id}/pairs")
    async def pairs(corpus_id: str, request: Request):
        handle = get_ready(corpus_id)
        body = await _json_body(request)
        include_mined = bool(body.get("include_mined", True))
        try:
            config = _mining_config(body)
        except (TypeError, ValueError) as exc:
            raise _ApiError(422, f"bad mining config: {exc}") from exc
        merged = Corpus(handle.corpus.records())
        if include_mined:
            for record in handle.mined.get(("subproofs", None), []):
                merged.add(record)
        out_dir = (
            data_root / corpus_id / "dataset"
            if data_root is not None
            else Path(".proofrank-data") / corpus_id / "dataset"
        )
        try:
            manifest, split = build_dataset(merged, config, out_dir)
        except TooFewFiles as exc:
            raise _ApiError(422, str(exc)) from exc
        return {
            "manifest": manifest,
            "splits": split.to_obj(),
            "split_warnings": [str(w) for w in split.warnings],
            "out_dir": str(out_dir),
        }

    @app.get("/v1/corpora/{corpus_id}/correlation")
    async def correlation(corpus_id: str, scorer: str = "jaccard"):
        handle = get_ready(corpus_id)
        if scorer not in ("jaccard", "bm25"):
            raise _ApiError(400, f"unknown statement scorer {scorer!r}")
        try:
            report = correlation_experiment(handle.corpus, scorer)
        except DegenerateInput as exc:
            raise _ApiError(422, str(exc)) from exc
        return report.to_obj()

    @app.put("/v1/corpora/{corpus_id}/embeddings")
    async def put_embeddings(corpus_id: str, request: Request):
        handle = get_ready(corpus_id)
        text = (await request.body()).decode("utf-8", errors="replace")
        try:
            store = load_embeddings(text)
        except EmbeddingFormatError as exc:
            raise _ApiError(422, str(exc)) from exc
        store.attach_corpus(handle.corpus)
        with handle.lock:
            handle.store = store
        return {"dim": store.dim, "count": len(store)}

    async def _json_body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _ApiError(400, f"body is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise _ApiError(400, "body must be a JSON object")
        return body

    return app


def _mining_config(body: dict) -> MiningConfig:
    distance = DistanceParams(
        alpha=float(body.get("alpha", 0.7)),
        noise_amplitude=float(body.get("noise_amplitude", 1e-3)),
    )
    ratios = body.get("split_ratios", (0.70, 0.20, 0.10))
    return MiningConfig(
        tau_pos=float(body.get("tau_pos", 0.3)),
        tau_neg=float(body.get("tau_neg", 0.65)),
        tau_hard=float(body.get("tau_hard", 0.45)),
        hard_negative_prob=float(body.get("hard_negative_prob", 0.30)),
        distance=distance,
        split_ratios=tuple(float(r) for r in ratios),
        seed=int(body.get("seed", 0)),
    )
