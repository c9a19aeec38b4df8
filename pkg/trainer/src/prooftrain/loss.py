"""Contrastive objective over unit statement embeddings.

A scored candidate list per anchor — one positive followed by the negatives —
is softmax-normalized at a temperature, and the loss is the negative log
probability of the positive. Logits are shifted by their maximum before
exponentiation so large cosine/temperature ratios cannot overflow.
"""

from __future__ import annotations

import torch


class ShapeMismatch(ValueError):
    """Anchor, positive, and negatives disagree on dimensionality."""


def _as_tensor(value) -> torch.Tensor:
    if isinstance(value, torch.Tensor):
        return value if value.is_floating_point() else value.double()
    return torch.as_tensor(value, dtype=torch.float64)


def info_nce_loss(
    anchor,
    positive,
    negatives,
    temperature: float = 0.07,
) -> torch.Tensor:
    """InfoNCE loss for one anchor against one positive and k negatives.

    Inputs are expected to be L2-normalized, so plain dot products are the
    cosine scores. Differentiable through torch autograd.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    anchor = _as_tensor(anchor)
    positive = _as_tensor(positive)
    negatives = _as_tensor(negatives)
    if anchor.dim() != 1:
        raise ShapeMismatch(f"anchor must be 1-d, got shape {tuple(anchor.shape)}")
    if positive.shape != anchor.shape:
        raise ShapeMismatch(
            f"positive shape {tuple(positive.shape)} does not match anchor "
            f"shape {tuple(anchor.shape)}"
        )
    if negatives.dim() != 2 or negatives.shape[0] < 1:
        raise ShapeMismatch(
            f"negatives must be a non-empty 2-d stack, got shape "
            f"{tuple(negatives.shape)}"
        )
    if negatives.shape[1] != anchor.shape[0]:
        raise ShapeMismatch(
            f"negative dimension {negatives.shape[1]} does not match anchor "
            f"dimension {anchor.shape[0]}"
        )
    pos_logit = (anchor * positive).sum() / temperature
    neg_logits = negatives @ anchor / temperature
    logits = torch.cat([pos_logit.reshape(1), neg_logits])
    shift = logits.detach().max()
    stable = logits - shift
    return torch.log(torch.exp(stable).sum()) - stable[0]


def batched_info_nce(
    anchors: torch.Tensor,
    positives: torch.Tensor,
    negatives: torch.Tensor,
    temperature: float,
) -> torch.Tensor:
    """Mean InfoNCE over a batch: (B, d), (B, d), and (B, k, d) inputs."""
    if anchors.dim() != 2 or positives.shape != anchors.shape:
        raise ShapeMismatch(
            f"batch shapes {tuple(anchors.shape)} / {tuple(positives.shape)} "
            "do not agree"
        )
    if negatives.dim() != 3 or negatives.shape[0] != anchors.shape[0] or (
        negatives.shape[2] != anchors.shape[1]
    ):
        raise ShapeMismatch(
            f"negative stack shape {tuple(negatives.shape)} does not fit "
            f"anchors {tuple(anchors.shape)}"
        )
    pos = (anchors * positives).sum(dim=-1, keepdim=True)
    neg = torch.einsum("bd,bkd->bk", anchors, negatives)
    logits = torch.cat([pos, neg], dim=1) / temperature
    targets = torch.zeros(logits.shape[0], dtype=torch.long, device=logits.device)
    return torch.nn.functional.cross_entropy(logits, targets)
