"""Training loop and checkpointing for the statement embedder.

One process, one model. Optimization is AdamW with a linear learning-rate
warmup over the first tenth of the step budget, then a constant rate. A run
is fully determined by its config: the subword vocabulary is learned from
the corpus statements, model initialization and dropout draw from the torch
generator, and batch sampling draws from a Python generator, all seeded from
``config.seed``, so the same config on the same dataset reproduces the loss
curve float for float.
"""

from __future__ import annotations

import os
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import torch

from .data import BatchSampler, DatasetError, PairDataset
from .loss import batched_info_nce
from .model import StatementEncoder, pad_batch
from .tokenizer import BpeTokenizer

CHECKPOINT_FORMAT = "statement-embedder-checkpoint"


class CheckpointCorrupt(Exception):
    """A checkpoint file could not be read back as a model."""


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 4e-6
    betas: tuple[float, float] = (0.9, 0.99)
    weight_decay: float = 1e-2
    warmup_fraction: float = 0.1
    batch_size: int = 16
    dropout: float = 0.1
    embedding_dim: int = 768
    hidden_dim: int = 256
    n_layers: int = 4
    n_heads: int = 4
    max_seq_len: int = 128
    k_neg: int = 100
    temperature: float = 0.07
    steps: int = 22000
    bpe_merges: int = 8000
    seed: int = 0

    def __post_init__(self):
        positive = {
            "lr": self.lr,
            "weight_decay": self.weight_decay,
            "warmup_fraction": self.warmup_fraction,
            "batch_size": self.batch_size,
            "embedding_dim": self.embedding_dim,
            "hidden_dim": self.hidden_dim,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "max_seq_len": self.max_seq_len,
            "temperature": self.temperature,
            "steps": self.steps,
            "bpe_merges": self.bpe_merges,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if len(self.betas) != 2 or not all(0.0 < b < 1.0 for b in self.betas):
            raise ValueError(f"betas must be two values in (0, 1), got {self.betas}")
        if self.warmup_fraction > 1.0:
            raise ValueError(
                f"warmup_fraction must be <= 1, got {self.warmup_fraction}"
            )
        if self.k_neg < 1:
            raise ValueError(f"k_neg must be >= 1, got {self.k_neg}")
        if self.hidden_dim % self.n_heads != 0:
            raise ValueError(
                f"hidden_dim {self.hidden_dim} is not divisible by "
                f"n_heads {self.n_heads}"
            )

    def to_obj(self) -> dict:
        return {
            "lr": self.lr,
            "betas": list(self.betas),
            "weight_decay": self.weight_decay,
            "warmup_fraction": self.warmup_fraction,
            "batch_size": self.batch_size,
            "dropout": self.dropout,
            "embedding_dim": self.embedding_dim,
            "hidden_dim": self.hidden_dim,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "max_seq_len": self.max_seq_len,
            "k_neg": self.k_neg,
            "temperature": self.temperature,
            "steps": self.steps,
            "bpe_merges": self.bpe_merges,
            "seed": self.seed,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "TrainConfig":
        data = dict(obj)
        data["betas"] = tuple(data["betas"])
        return cls(**data)


@dataclass
class TrainResult:
    losses: list[float] = field(default_factory=list)
    val_losses: list[tuple[int, float]] = field(default_factory=list)
    checkpoint: Optional[Path] = None
    model: Optional[StatementEncoder] = None
    tokenizer: Optional[BpeTokenizer] = None
    config: Optional[TrainConfig] = None


def build_model(vocab_size: int, config: TrainConfig) -> StatementEncoder:
    return StatementEncoder(
        vocab_size=vocab_size,
        hidden_dim=config.hidden_dim,
        n_layers=config.n_layers,
        n_heads=config.n_heads,
        embedding_dim=config.embedding_dim,
        max_seq_len=config.max_seq_len,
        dropout=config.dropout,
    )


def _batch_forward(
    model: StatementEncoder,
    tokenizer: BpeTokenizer,
    dataset: PairDataset,
    batch,
    k_neg: int,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """One padded forward pass over anchors, positives, and negatives."""
    ids = list(batch.anchors) + list(batch.positives)
    for negs in batch.negatives:
        ids.extend(negs)
    token_lists = [
        tokenizer.encode(dataset.statement(rid), max_len=model.max_seq_len)
        for rid in ids
    ]
    padded, mask = pad_batch(token_lists)
    embedded = model(padded, mask)
    n = len(batch.anchors)
    anchors = embedded[:n]
    positives = embedded[n : 2 * n]
    negatives = embedded[2 * n :].reshape(n, k_neg, -1)
    return anchors, positives, negatives


def train(
    dataset_dir: str | Path,
    config: TrainConfig,
    checkpoint_out: Optional[str | Path] = None,
    log: Optional[Callable[[str], None]] = None,
) -> TrainResult:
    """Train the embedder on an exported pair dataset.

    Logs the per-step training loss and a periodic validation loss (when the
    val split has usable anchors), and writes a checkpoint at the end when
    ``checkpoint_out`` is given.
    """
    dataset = PairDataset.load(dataset_dir)
    torch.manual_seed(config.seed)
    tokenizer = BpeTokenizer.train(
        (dataset.statements[rid] for rid in sorted(dataset.statements)),
        max_merges=config.bpe_merges,
    )
    model = build_model(tokenizer.vocab_size(), config)
    model.train()
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=config.lr,
        betas=config.betas,
        weight_decay=config.weight_decay,
    )
    warmup_steps = max(1, int(round(config.steps * config.warmup_fraction)))
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: min(1.0, (step + 1) / warmup_steps)
    )
    sampler = BatchSampler(
        dataset,
        "train",
        config.batch_size,
        config.k_neg,
        random.Random(config.seed),
    )
    try:
        val_sampler = BatchSampler(
            dataset,
            "val",
            config.batch_size,
            config.k_neg,
            random.Random(f"{config.seed}/val"),
        )
        val_batches = [val_sampler.next_batch() for _ in range(4)]
    except DatasetError:
        val_batches = []
    val_every = max(1, config.steps // 10)

    result = TrainResult(model=model, tokenizer=tokenizer, config=config)
    for step in range(config.steps):
        anchors, positives, negatives = _batch_forward(
            model, tokenizer, dataset, sampler.next_batch(), config.k_neg
        )
        loss = batched_info_nce(anchors, positives, negatives, config.temperature)
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        scheduler.step()
        value = float(loss.detach())
        result.losses.append(value)
        if log:
            log(f"step {step + 1} loss {value:.6f}")
        if val_batches and (step + 1) % val_every == 0:
            model.eval()
            with torch.no_grad():
                val_value = sum(
                    float(
                        batched_info_nce(
                            *_batch_forward(
                                model, tokenizer, dataset, vb, config.k_neg
                            ),
                            config.temperature,
                        )
                    )
                    for vb in val_batches
                ) / len(val_batches)
            model.train()
            result.val_losses.append((step + 1, val_value))
            if log:
                log(f"step {step + 1} val_loss {val_value:.6f}")

    model.eval()
    if checkpoint_out is not None:
        result.checkpoint = save_checkpoint(
            checkpoint_out, model, tokenizer, config, step_count=config.steps
        )
    return result


def save_checkpoint(
    path: str | Path,
    model: StatementEncoder,
    tokenizer: BpeTokenizer,
    config: TrainConfig,
    step_count: int = 0,
) -> Path:
    """Atomically write a self-contained checkpoint (temp file + rename)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": config.to_obj(),
        "tokenizer": tokenizer.to_obj(),
        "model_state": model.state_dict(),
        "steps_trained": step_count,
    }
    fd, tmp_name = tempfile.mkstemp(
        dir=out.parent, prefix=out.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as handle:
            torch.save(payload, handle)
        os.replace(tmp_name, out)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return out


def load_checkpoint(
    path: str | Path,
) -> tuple[StatementEncoder, BpeTokenizer, TrainConfig]:
    """Read a checkpoint back into an eval-mode model."""
    try:
        payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointCorrupt(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointCorrupt(
            f"{path} is not a statement-embedder checkpoint"
        )
    try:
        config = TrainConfig.from_obj(payload["config"])
        tokenizer = BpeTokenizer.from_obj(payload["tokenizer"])
        model = build_model(tokenizer.vocab_size(), config)
        model.load_state_dict(payload["model_state"])
    except CheckpointCorrupt:
        raise
    except Exception as exc:
        raise CheckpointCorrupt(f"checkpoint {path} is incomplete: {exc}") from exc
    model.eval()
    return model, tokenizer, config
