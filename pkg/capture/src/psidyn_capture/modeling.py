"""Model and tokenizer loading with an offline fallback.

The pinned default is GPT-2-medium (24 blocks, 16 heads, hidden 1024).
When the public model hub is unreachable, the same architecture is
instantiated with seeded random weights and a byte-level fallback
tokenizer; every manifest records which variant produced it. Captures
from random weights exercise the full recording contract (shapes,
formats, perturbation machinery) but carry no pretrained dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from transformers import GPT2Config, GPT2LMHeadModel

from .errors import CaptureConfigError

PINNED_MODEL = "gpt2-medium"

#: Architectures the offline fallback knows how to rebuild.
KNOWN_ARCHITECTURES = {
    "gpt2-medium": dict(n_layer=24, n_head=16, n_embd=1024),
}

MIN_BLOCKS = 24
MIN_HEADS = 16


class ByteTokenizer:
    """Maps UTF-8 bytes to token ids; stands in when no vocab is available."""

    eos_token_id = None

    def encode(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def decode(self, ids) -> str:
        return bytes(int(i) % 256 for i in ids).decode("latin-1")


@dataclass
class LoadedModel:
    model: GPT2LMHeadModel
    tokenizer: object
    name: str
    weights: str  # "pretrained" | "random-init"
    weights_seed: int

    @property
    def n_blocks(self) -> int:
        return self.model.config.n_layer

    @property
    def n_heads(self) -> int:
        return self.model.config.n_head

    @property
    def hidden_size(self) -> int:
        return self.model.config.n_embd


def _validate(model: GPT2LMHeadModel, name: str) -> None:
    cfg = model.config
    if cfg.n_layer < MIN_BLOCKS or cfg.n_head < MIN_HEADS:
        raise CaptureConfigError(
            f"{name}: need >= {MIN_BLOCKS} blocks and {MIN_HEADS} heads, "
            f"got {cfg.n_layer}/{cfg.n_head}"
        )


def load_model(
    name: str = PINNED_MODEL,
    allow_random_init: bool = True,
    weights_seed: int = 0,
    hidden_size: int | None = None,
) -> LoadedModel:
    """Load the pinned model, falling back to seeded random weights.

    ``hidden_size`` only applies to the fallback and exists so tests
    can shrink the model while keeping the block/head structure.
    """
    if hidden_size is None:
        try:
            from transformers import AutoTokenizer

            model = GPT2LMHeadModel.from_pretrained(name)
            tokenizer = AutoTokenizer.from_pretrained(name)
            model.eval()
            _validate(model, name)
            return LoadedModel(model=model, tokenizer=tokenizer, name=name,
                               weights="pretrained", weights_seed=-1)
        except OSError:
            if not allow_random_init:
                raise
    if name not in KNOWN_ARCHITECTURES:
        raise CaptureConfigError(
            f"cannot rebuild {name!r} offline; known: {sorted(KNOWN_ARCHITECTURES)}"
        )
    arch = dict(KNOWN_ARCHITECTURES[name])
    if hidden_size is not None:
        arch["n_embd"] = int(hidden_size)
    torch.manual_seed(weights_seed)
    config = GPT2Config(vocab_size=50257, n_positions=1024,
                        bos_token_id=None, eos_token_id=None, **arch)
    model = GPT2LMHeadModel(config)
    model.eval()
    _validate(model, name)
    return LoadedModel(model=model, tokenizer=ByteTokenizer(), name=name,
                       weights="random-init", weights_seed=weights_seed)
