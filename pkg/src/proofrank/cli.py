"""Command-line front end.

Every option can also be supplied through an environment variable named
``PROOFRANK_<OPTION>`` (for example ``PROOFRANK_PORT`` for ``--port``).
Exit codes: 0 success, 2 usage error (click's default), 3 data error
(unparseable input, too few files, degenerate statistics, bad embeddings).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .analysis import DegenerateInput, correlation_experiment
from .corpus import Corpus
from .metrics import DistanceParams
from .pairs import MiningConfig, TooFewFiles, build_dataset
from .parsing import SourceFile
from .ranking import (
    EmptyPool,
    EmbeddingFormatError,
    EmbeddingMissing,
    load_embeddings,
    make_scorer,
    top_k,
)
from .treemine import (
    GoalOracle,
    GoalSelectorUnsupported,
    KOutOfRange,
    MalformedBullets,
    mine_after_k,
    mine_subproofs,
    mined_to_record,
)

EXIT_DATA_ERROR = 3

_DATA_ERRORS = (
    TooFewFiles,
    DegenerateInput,
    EmbeddingFormatError,
    EmbeddingMissing,
    EmptyPool,
    ValueError,
    OSError,
    json.JSONDecodeError,
)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_DATA_ERROR)


def _load_corpus(path: str) -> Corpus:
    try:
        return Corpus.load(Path(path))
    except _DATA_ERRORS as exc:
        _fail(f"cannot load corpus from {path}: {exc}")


@click.group()
@click.version_option(version=__version__, prog_name="proofrank")
def main() -> None:
    """Proof-corpus tooling: parse scripts, mine sub-proofs, build contrastive
    pair datasets, analyse similarity/distance correlation, rank premises."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
@click.option(
    "--out",
    envvar="PROOFRANK_OUT",
    type=click.Path(),
    default=None,
    help="Directory to write corpus JSON into (omit for a dry run).",
)
@click.option(
    "--quiet", envvar="PROOFRANK_QUIET", is_flag=True, help="Suppress diagnostics."
)
def parse(files: tuple[str, ...], out: str | None, quiet: bool) -> None:
    """Parse .v proof scripts into theorem records."""
    sources = []
    for name in files:
        try:
            sources.append(SourceFile(name, Path(name).read_text(encoding="utf-8")))
        except OSError as exc:
            _fail(f"cannot read {name}: {exc}")
    corpus, diagnostics = Corpus.from_sources(sources)
    if not quiet:
        for diag in diagnostics:
            click.echo(str(diag), err=True)
    if len(corpus) == 0:
        _fail("no theorems parsed")
    if out is not None:
        corpus.save(Path(out))
    click.echo(
        json.dumps(
            {
                "n_files": len(corpus.files()),
                "n_records": len(corpus),
                "n_diagnostics": len(diagnostics),
            }
        )
    )


@main.command()
@click.option(
    "--corpus",
    "corpus_dir",
    envvar="PROOFRANK_CORPUS",
    required=True,
    type=click.Path(exists=True),
    help="Corpus directory produced by `proofrank parse`.",
)
@click.option(
    "--mode",
    envvar="PROOFRANK_MODE",
    type=click.Choice(["subproofs", "after_k"]),
    default="subproofs",
    show_default=True,
)
@click.option("--k", envvar="PROOFRANK_K", type=int, default=None)
@click.option(
    "--goals",
    envvar="PROOFRANK_GOALS",
    type=click.Path(exists=True),
    default=None,
    help="Optional JSON file of checker-recorded goal states.",
)
@click.option(
    "--out",
    envvar="PROOFRANK_OUT",
    type=click.Path(),
    default=None,
    help="Write originals plus mined records as a new corpus directory.",
)
def mine(
    corpus_dir: str, mode: str, k: int | None, goals: str | None, out: str | None
) -> None:
    """Mine sub-proof records out of parsed proofs."""
    if mode == "after_k" and k is None:
        raise click.UsageError("--mode after_k requires --k")
    corpus = _load_corpus(corpus_dir)
    oracle = None
    if goals is not None:
        try:
            oracle = GoalOracle.from_json(Path(goals).read_text(encoding="utf-8"))
        except _DATA_ERRORS as exc:
            _fail(f"cannot load goal file {goals}: {exc}")
    mined_records = []
    skipped = 0
    failed = 0
    for record in corpus.records():
        try:
            if mode == "subproofs":
                mined = mine_subproofs(record, goals=oracle)
            else:
                mined = [mine_after_k(record, k, goals=oracle)]
        except GoalSelectorUnsupported:
            skipped += 1
            continue
        except (MalformedBullets, KOutOfRange):
            failed += 1
            continue
        mined_records.extend(mined_to_record(m, record) for m in mined)
    if out is not None:
        merged = Corpus(corpus.records())
        for record in mined_records:
            merged.add(record)
        merged.save(Path(out))
    click.echo(
        json.dumps(
            {
                "mode": mode,
                "k": k,
                "n_sources": len(corpus),
                "n_mined": len(mined_records),
                "n_skipped_goal_selectors": skipped,
                "n_failed": failed,
            }
        )
    )


@main.command()
@click.option(
    "--corpus",
    "corpus_dir",
    envvar="PROOFRANK_CORPUS",
    required=True,
    type=click.Path(exists=True),
)
@click.option("--out", envvar="PROOFRANK_OUT", required=True, type=click.Path())
@click.option(
    "--tau-pos", envvar="PROOFRANK_TAU_POS", type=float, default=0.3, show_default=True
)
@click.option(
    "--tau-neg", envvar="PROOFRANK_TAU_NEG", type=float, default=0.65, show_default=True
)
@click.option(
    "--tau-hard",
    envvar="PROOFRANK_TAU_HARD",
    type=float,
    default=0.45,
    show_default=True,
)
@click.option(
    "--hard-negative-prob",
    envvar="PROOFRANK_HARD_NEGATIVE_PROB",
    type=float,
    default=0.30,
    show_default=True,
)
@click.option(
    "--alpha", envvar="PROOFRANK_ALPHA", type=float, default=0.7, show_default=True
)
@click.option(
    "--noise-amplitude",
    envvar="PROOFRANK_NOISE_AMPLITUDE",
    type=float,
    default=1e-3,
    show_default=True,
)
@click.option("--seed", envvar="PROOFRANK_SEED", type=int, default=0, show_default=True)
@click.option(
    "--split-ratios",
    envvar="PROOFRANK_SPLIT_RATIOS",
    default="0.70,0.20,0.10",
    show_default=True,
    help="Comma-separated train,val,test fractions.",
)
def pairs(
    corpus_dir: str,
    out: str,
    tau_pos: float,
    tau_neg: float,
    tau_hard: float,
    hard_negative_prob: float,
    alpha: float,
    noise_amplitude: float,
    seed: int,
    split_ratios: str,
) -> None:
    """Label all theorem pairs and export a contrastive dataset."""
    corpus = _load_corpus(corpus_dir)
    try:
        ratios = tuple(float(r) for r in split_ratios.split(","))
        config = MiningConfig(
            tau_pos=tau_pos,
            tau_neg=tau_neg,
            tau_hard=tau_hard,
            hard_negative_prob=hard_negative_prob,
            distance=DistanceParams(alpha=alpha, noise_amplitude=noise_amplitude),
            split_ratios=ratios,
            seed=seed,
        )
    except ValueError as exc:
        _fail(f"bad mining config: {exc}")
    try:
        manifest, split = build_dataset(corpus, config, Path(out))
    except _DATA_ERRORS as exc:
        _fail(str(exc))
    for warning in split.warnings:
        click.echo(str(warning), err=True)
    click.echo(json.dumps(manifest))


@main.command()
@click.option(
    "--corpus",
    "corpus_dir",
    envvar="PROOFRANK_CORPUS",
    required=True,
    type=click.Path(exists=True),
)
@click.option(
    "--scorer",
    envvar="PROOFRANK_SCORER",
    type=click.Choice(["jaccard", "bm25"]),
    default="jaccard",
    show_default=True,
)
@click.option(
    "--alpha", envvar="PROOFRANK_ALPHA", type=float, default=0.7, show_default=True
)
@click.option(
    "--json",
    "as_json",
    envvar="PROOFRANK_JSON",
    is_flag=True,
    help="Emit the report as JSON instead of a table.",
)
def correlate(corpus_dir: str, scorer: str, alpha: float, as_json: bool) -> None:
    """Report Pearson/Spearman correlation between statement similarity and
    proof distance, with a proof-distance histogram."""
    corpus = _load_corpus(corpus_dir)
    try:
        report = correlation_experiment(
            corpus, scorer, params=DistanceParams(alpha=alpha, noise_amplitude=0.0)
        )
    except _DATA_ERRORS as exc:
        _fail(str(exc))
    if as_json:
        click.echo(json.dumps(report.to_obj()))
    else:
        click.echo(report.table())


@main.command()
@click.option(
    "--corpus",
    "corpus_dir",
    envvar="PROOFRANK_CORPUS",
    required=True,
    type=click.Path(exists=True),
)
@click.option(
    "--statement",
    envvar="PROOFRANK_STATEMENT",
    required=True,
    help="Statement text to rank candidates against.",
)
@click.option(
    "--file",
    "file_filter",
    envvar="PROOFRANK_FILE",
    default=None,
    help="Restrict the candidate pool to one source file.",
)
@click.option("--k", envvar="PROOFRANK_K", type=int, default=15, show_default=True)
@click.option(
    "--scorer",
    envvar="PROOFRANK_SCORER",
    type=click.Choice(["jaccard", "bm25", "embedding"]),
    default="jaccard",
    show_default=True,
)
@click.option(
    "--embeddings",
    envvar="PROOFRANK_EMBEDDINGS",
    type=click.Path(exists=True),
    default=None,
    help="Embedding store (required for --scorer embedding).",
)
@click.option(
    "--fallback-jaccard",
    envvar="PROOFRANK_FALLBACK_JACCARD",
    is_flag=True,
    help="Fall back to the token scorer when an embedding is missing.",
)
def rank(
    corpus_dir: str,
    statement: str,
    file_filter: str | None,
    k: int,
    scorer: str,
    embeddings: str | None,
    fallback_jaccard: bool,
) -> None:
    """Rank corpus records by similarity to a statement."""
    corpus = _load_corpus(corpus_dir)
    store = None
    if embeddings is not None:
        try:
            store = load_embeddings(Path(embeddings))
            store.attach_corpus(corpus)
        except _DATA_ERRORS as exc:
            _fail(f"cannot load embeddings: {exc}")
    if file_filter is not None:
        pool = [r for r in corpus.records() if r.file == file_filter]
    else:
        pool = corpus.records()
    try:
        ranker = make_scorer(scorer, store=store, fallback_to_jaccard=fallback_jaccard)
        results = top_k(ranker, statement, pool, k)
    except _DATA_ERRORS as exc:
        _fail(str(exc))
    for item in results:
        record = corpus.get(item.record_id)
        click.echo(
            json.dumps(
                {
                    "rank": item.rank,
                    "id": item.record_id,
                    "score": item.score,
                    "statement": record.statement_text,
                }
            )
        )


@main.command()
@click.option(
    "--port", envvar="PROOFRANK_PORT", type=int, default=7711, show_default=True
)
@click.option(
    "--host", envvar="PROOFRANK_HOST", default="127.0.0.1", show_default=True
)
@click.option(
    "--max-corpora",
    envvar="PROOFRANK_MAX_CORPORA",
    type=int,
    default=16,
    show_default=True,
)
@click.option(
    "--embeddings",
    envvar="PROOFRANK_EMBEDDINGS",
    type=click.Path(exists=True),
    default=None,
    help="Embedding store applied to every corpus at build time.",
)
@click.option(
    "--data-dir",
    envvar="PROOFRANK_DATA_DIR",
    type=click.Path(),
    default=None,
    help="Where pair-dataset exports are written.",
)
def serve(
    port: int,
    host: str,
    max_corpora: int,
    embeddings: str | None,
    data_dir: str | None,
) -> None:
    """Run the REST service."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(
            max_corpora=max_corpora, data_dir=data_dir, embeddings_path=embeddings
        )
    except _DATA_ERRORS as exc:
        _fail(f"cannot start service: {exc}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
