"""Train a tiny statement embedder and use it from the ranker.

Demonstrates the two packages talking only through files: the corpus engine
exports a pair dataset to disk, the trainer CLI consumes that directory and
emits a checkpoint plus a JSONL embedding store, and the ranker loads the
store to answer similarity queries. Training here is deliberately small —
a few hundred steps on a synthetic corpus.

The corpus is built so that raw token overlap is a trap: every alpha-family
statement shares a pair of tokens with five beta-family statements, while
family membership itself is carried by a single marker token. Token-overlap
retrieval therefore fetches lemmas whose proofs look nothing like the query's,
and the trained embedder has to discover the marker to do better.

Run:  python3 demos/embedding_roundtrip.py
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from proofrank import (
    Corpus,
    EmbeddingScorer,
    JaccardScorer,
    MiningConfig,
    SourceFile,
    build_dataset,
    evaluate_ranker,
    load_embeddings,
)


def cluster_sources(n_files: int = 6, per_cluster: int = 6) -> list[SourceFile]:
    """Two proof families per file, with misleading statement overlap.

    Each alpha lemma names five beta lemmas through paired link tokens, so by
    token overlap its closest statements are all in the other family; only
    the ``alphamark``/``betamark`` tokens reveal which proofs actually look
    alike.
    """
    files = []
    for f in range(n_files):
        lines = []
        for j in range(per_cluster):
            links = " ".join(
                f"g{f}j{j}m{(j + i) % per_cluster}p g{f}j{j}m{(j + i) % per_cluster}q"
                for i in range(1, 6)
            )
            lines.append(f"Lemma alpha{j} : alphamark selfa{f}u{j} {links}.")
            lines.append(
                f"Proof. introsa{f} h{j}. applya{f} corea{f}. autoa{f}. Qed."
            )
        for m in range(per_cluster):
            received = " ".join(
                f"g{f}j{(m - i) % per_cluster}m{m}p g{f}j{(m - i) % per_cluster}m{m}q"
                for i in range(1, 6)
            )
            lines.append(f"Lemma beta{m} : betamark {received}.")
            lines.append(
                f"Proof. unfoldb{f} q{m}. splitb{f}; firstb{f}. reflb{f}. Qed."
            )
        files.append(SourceFile(f"demo{f}.v", "\n".join(lines) + "\n"))
    return files


def run_trainer(args: list[str]) -> str:
    """Run a trainer CLI subcommand; return its stdout summary line."""
    proc = subprocess.run(
        [sys.executable, "-m", "prooftrain.cli", *args],
        check=True,
        stdout=subprocess.PIPE,
        text=True,
    )
    return proc.stdout.strip()


def main() -> None:
    root = Path(tempfile.mkdtemp())
    dataset = root / "dataset"
    corpus, _ = Corpus.from_sources(cluster_sources())
    manifest, _ = build_dataset(corpus, MiningConfig(seed=1), dataset)
    print(
        f"exported {manifest['n_records']} records, "
        f"{manifest['n_pairs']} labeled pairs -> {dataset}",
        flush=True,
    )

    checkpoint = root / "embedder.pt"
    store_path = root / "store.jsonl"
    summary = run_trainer(
        ["train", "--data", str(dataset), "--steps", "300", "--seed", "0",
         "--out", str(checkpoint), "--lr", "1e-3", "--batch-size", "8",
         "--k-neg", "4", "--quiet"]
    )
    print(f"trained: {summary}")
    summary = run_trainer(
        ["encode", "--ckpt", str(checkpoint), "--corpus", str(dataset),
         "--out", str(store_path)]
    )
    print(f"encoded: {summary}")

    store = load_embeddings(store_path)
    store.attach_corpus(corpus)
    print("\nretrieval at k=5, every lemma as query against its own file:")
    for name, scorer in [
        ("token overlap", JaccardScorer()),
        ("trained embeddings", EmbeddingScorer(store)),
    ]:
        report = evaluate_ranker(corpus, scorer, k=5)
        print(f"  {name:>18}: mean best retrieved-proof distance "
              f"{report.mean_min_distance:.3f}, solve rate {report.solve_rate:.2f}")


if __name__ == "__main__":
    main()
