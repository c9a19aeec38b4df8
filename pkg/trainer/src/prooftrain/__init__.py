"""Contrastive statement-embedding trainer for exported proof-pair datasets.

Consumes the directory layout the pair-mining exporter writes (corpus
records, labeled pairs, adjacency, file-level splits) and produces JSONL
embedding stores in the format the premise ranker loads.
"""

from .data import (
    BatchSampler,
    DatasetError,
    EmptyPositives,
    MissingSplit,
    PairDataset,
    TrainingBatch,
)
from .export import embed_statements, encode_corpus, read_corpus_statements, write_store
from .loss import ShapeMismatch, batched_info_nce, info_nce_loss
from .model import StatementEncoder, encode_texts, pad_batch
from .tokenizer import PAD_ID, UNK_ID, BpeTokenizer
from .train import (
    CheckpointCorrupt,
    TrainConfig,
    TrainResult,
    build_model,
    load_checkpoint,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSampler",
    "BpeTokenizer",
    "CheckpointCorrupt",
    "DatasetError",
    "EmptyPositives",
    "MissingSplit",
    "PAD_ID",
    "PairDataset",
    "ShapeMismatch",
    "StatementEncoder",
    "TrainConfig",
    "TrainResult",
    "TrainingBatch",
    "UNK_ID",
    "batched_info_nce",
    "build_model",
    "embed_statements",
    "encode_corpus",
    "encode_texts",
    "info_nce_loss",
    "load_checkpoint",
    "pad_batch",
    "read_corpus_statements",
    "save_checkpoint",
    "train",
    "write_store",
    "__version__",
]
