"""Architectural perturbations: head masking and weight noise.

Head "removal" is output masking rather than structural surgery: the
attention output projection of each listed block is wrapped so the
concatenated head outputs of removed heads are zeroed before the
projection. This makes removed heads contribute exactly nothing to the
block output (their value paths become dead) while staying reversible
and leaving every parameter untouched.
"""

from __future__ import annotations

import torch
from torch import nn

from .conditions import NoiseSpec, PruneSpec
from .errors import CaptureConfigError


class MaskedHeadProjection(nn.Module):
    """Zeroes removed-head slices of the pre-projection activations."""

    def __init__(self, proj: nn.Module, n_heads: int, hidden: int,
                 keep_heads: tuple[int, ...]):
        super().__init__()
        self.proj = proj
        head_dim = hidden // n_heads
        mask = torch.zeros(hidden)
        for head in keep_heads:
            mask[head * head_dim:(head + 1) * head_dim] = 1.0
        self.register_buffer("head_mask", mask)

    def forward(self, x):
        return self.proj(x * self.head_mask)


def apply_head_pruning(model, prune_spec: PruneSpec):
    """Mask all but ``keep_heads`` in the listed blocks, in place."""
    cfg = model.config
    blocks = model.transformer.h
    if max(prune_spec.blocks) >= len(blocks):
        raise CaptureConfigError(
            f"block {max(prune_spec.blocks)} out of range (model has {len(blocks)})"
        )
    if prune_spec.keep_heads and max(prune_spec.keep_heads) >= cfg.n_head:
        raise CaptureConfigError(
            f"head {max(prune_spec.keep_heads)} out of range ({cfg.n_head} heads)"
        )
    if len(set(prune_spec.keep_heads)) == cfg.n_head:
        return model  # keeping every head is the identity
    for idx in prune_spec.blocks:
        attn = blocks[idx].attn
        attn.c_proj = MaskedHeadProjection(
            attn.c_proj, cfg.n_head, cfg.n_embd, prune_spec.keep_heads
        )
    return model


def iter_noise_targets(model, blocks: tuple[int, ...]):
    """(name, weight) pairs of every linear map in the listed blocks.

    GPT-2 realises its linear layers as Conv1D modules (c_attn, c_proj,
    c_fc); anything with a 2-D ``weight`` inside the block qualifies.
    Biases and layer norms are untouched.
    """
    for idx in blocks:
        block = model.transformer.h[idx]
        for name, module in block.named_modules():
            weight = getattr(module, "weight", None)
            if weight is not None and weight.dim() == 2:
                yield f"h.{idx}.{name}", weight


def apply_weight_noise(model, noise_spec: NoiseSpec, seed: int):
    """Add seeded Gaussian noise, sigma = scale * std(W), per matrix."""
    if max(noise_spec.blocks) >= len(model.transformer.h):
        raise CaptureConfigError(
            f"block {max(noise_spec.blocks)} out of range"
        )
    generator = torch.Generator().manual_seed(int(seed))
    with torch.no_grad():
        for _, weight in iter_noise_targets(model, noise_spec.blocks):
            sigma = noise_spec.sigma_scale * weight.std().item()
            if sigma == 0.0:
                continue
            noise = torch.empty_like(weight).normal_(
                mean=0.0, std=sigma, generator=generator
            )
            weight.add_(noise)
    return model
