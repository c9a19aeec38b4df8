"""Command line for training and exporting statement embeddings."""

from __future__ import annotations

import json
import sys

import click

from . import __version__
from .data import DatasetError
from .train import CheckpointCorrupt, TrainConfig, train as run_training
from .export import encode_corpus

_DATA_ERRORS = (DatasetError, CheckpointCorrupt, ValueError, OSError)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(3)


@click.group()
@click.version_option(version=__version__, prog_name="prooftrain")
def main() -> None:
    """Train a contrastive statement embedder on an exported pair dataset
    and emit embedding stores the premise ranker can load."""


@main.command(name="train")
@click.option(
    "--data",
    "data_dir",
    envvar="PROOFTRAIN_DATA",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Exported pair-dataset directory.",
)
@click.option(
    "--steps",
    envvar="PROOFTRAIN_STEPS",
    type=int,
    default=TrainConfig.steps,
    show_default=True,
    help="Optimizer steps to run.",
)
@click.option(
    "--seed",
    envvar="PROOFTRAIN_SEED",
    type=int,
    default=0,
    show_default=True,
    help="Seed for sampling, initialization, and dropout.",
)
@click.option(
    "--out",
    "out_path",
    envvar="PROOFTRAIN_OUT",
    type=click.Path(dir_okay=False),
    default="embedder.pt",
    show_default=True,
    help="Checkpoint output path.",
)
@click.option("--lr", envvar="PROOFTRAIN_LR", type=float, default=None)
@click.option(
    "--batch-size", envvar="PROOFTRAIN_BATCH_SIZE", type=int, default=None
)
@click.option("--k-neg", envvar="PROOFTRAIN_K_NEG", type=int, default=None)
@click.option(
    "--temperature", envvar="PROOFTRAIN_TEMPERATURE", type=float, default=None
)
@click.option("--quiet", is_flag=True, help="Suppress per-step loss lines.")
def train_command(data_dir, steps, seed, out_path, lr, batch_size, k_neg,
                  temperature, quiet):
    """Train the embedder and write a checkpoint."""
    overrides = {"steps": steps, "seed": seed}
    if lr is not None:
        overrides["lr"] = lr
    if batch_size is not None:
        overrides["batch_size"] = batch_size
    if k_neg is not None:
        overrides["k_neg"] = k_neg
    if temperature is not None:
        overrides["temperature"] = temperature
    try:
        config = TrainConfig(**overrides)
    except ValueError as exc:
        _fail(str(exc))
    log = None if quiet else (lambda line: click.echo(line, err=True))
    try:
        result = run_training(data_dir, config, checkpoint_out=out_path, log=log)
    except _DATA_ERRORS as exc:
        _fail(str(exc))
    click.echo(
        json.dumps(
            {
                "steps": config.steps,
                "final_loss": result.losses[-1],
                "checkpoint": str(result.checkpoint),
            }
        )
    )


@main.command(name="encode")
@click.option(
    "--ckpt",
    "checkpoint",
    envvar="PROOFTRAIN_CKPT",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Trained checkpoint file.",
)
@click.option(
    "--corpus",
    "corpus_dir",
    envvar="PROOFTRAIN_CORPUS",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Corpus directory (or dataset directory containing corpus/).",
)
@click.option(
    "--out",
    "out_path",
    envvar="PROOFTRAIN_OUT",
    required=True,
    type=click.Path(dir_okay=False),
    help="Embedding store output path.",
)
def encode_command(checkpoint, corpus_dir, out_path):
    """Embed every corpus statement and write a JSONL embedding store."""
    try:
        out, count, dim = encode_corpus(checkpoint, corpus_dir, out_path)
    except _DATA_ERRORS as exc:
        _fail(str(exc))
    click.echo(json.dumps({"out": str(out), "count": count, "dim": dim}))


if __name__ == "__main__":
    main()
