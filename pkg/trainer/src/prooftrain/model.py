"""Statement encoder: token embeddings, a small self-attention stack, and a
mean-pooled projection to the output embedding space. Outputs are always
L2-normalized.
"""

from __future__ import annotations

import torch
from torch import nn

from .tokenizer import PAD_ID, BpeTokenizer


class StatementEncoder(nn.Module):
    def __init__(
        self,
        vocab_size: int,
        hidden_dim: int = 256,
        n_layers: int = 4,
        n_heads: int = 4,
        embedding_dim: int = 768,
        max_seq_len: int = 128,
        dropout: float = 0.1,
    ):
        super().__init__()
        if hidden_dim % n_heads != 0:
            raise ValueError(
                f"hidden_dim {hidden_dim} is not divisible by n_heads {n_heads}"
            )
        self.max_seq_len = max_seq_len
        self.token_embed = nn.Embedding(vocab_size, hidden_dim, padding_idx=PAD_ID)
        self.position_embed = nn.Embedding(max_seq_len, hidden_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_dim,
            nhead=n_heads,
            dim_feedforward=2 * hidden_dim,
            dropout=dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
        )
        self.stack = nn.TransformerEncoder(
            layer, num_layers=n_layers, enable_nested_tensor=False
        )
        self.project = nn.Linear(hidden_dim, embedding_dim)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Embed a padded id batch; ``mask`` is True where a token is real."""
        length = ids.shape[1]
        positions = torch.arange(length, device=ids.device)
        x = self.token_embed(ids) + self.position_embed(positions)
        h = self.stack(x, src_key_padding_mask=~mask)
        weights = mask.unsqueeze(-1).to(h.dtype)
        pooled = (h * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)
        z = self.project(pooled)
        return nn.functional.normalize(z, dim=-1)


def pad_batch(
    token_lists: list[list[int]], device: torch.device | None = None
) -> tuple[torch.Tensor, torch.Tensor]:
    """Right-pad variable-length id lists into (ids, mask) tensors."""
    width = max(len(ids) for ids in token_lists)
    ids = torch.full((len(token_lists), width), PAD_ID, dtype=torch.long)
    mask = torch.zeros((len(token_lists), width), dtype=torch.bool)
    for row, tokens in enumerate(token_lists):
        ids[row, : len(tokens)] = torch.tensor(tokens, dtype=torch.long)
        mask[row, : len(tokens)] = True
    if device is not None:
        ids = ids.to(device)
        mask = mask.to(device)
    return ids, mask


def encode_texts(
    model: StatementEncoder,
    tokenizer: BpeTokenizer,
    texts: list[str],
    batch_size: int = 64,
) -> torch.Tensor:
    """Embed statements in eval mode (no dropout, no gradients)."""
    was_training = model.training
    model.eval()
    chunks: list[torch.Tensor] = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            chunk = texts[start : start + batch_size]
            token_lists = [
                tokenizer.encode(text, max_len=model.max_seq_len) for text in chunk
            ]
            ids, mask = pad_batch(token_lists)
            chunks.append(model(ids, mask))
    if was_training:
        model.train()
    if not chunks:
        return torch.empty((0, model.project.out_features))
    return torch.cat(chunks, dim=0)
