"""The five recording conditions and their fixed generation settings.

Sampling parameters are part of each condition's definition:
structured prompts and both perturbed variants sample at temperature
1.0 with top-k 50; forced repetition lowers temperature to 0.7 (top-k
stays at the 50 default and is recorded); the destabilised condition
raises temperature to 2.5 with top-k 200.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import CaptureConfigError

CONDITIONS = (
    "intact_complex",
    "intact_repetition",
    "intact_noisy",
    "damaged_heads",
    "damaged_noise",
)

PERTURBED_BLOCKS = (20, 21, 22, 23)
KEPT_HEADS = (0, 1, 2, 3)
NOISE_SIGMA_SCALE = 0.1

_SAMPLING = {
    "intact_complex": (1.0, 50),
    "intact_repetition": (0.7, 50),
    "intact_noisy": (2.5, 200),
    "damaged_heads": (1.0, 50),
    "damaged_noise": (1.0, 50),
}


@dataclass(frozen=True)
class PruneSpec:
    blocks: tuple[int, ...] = PERTURBED_BLOCKS
    keep_heads: tuple[int, ...] = KEPT_HEADS


@dataclass(frozen=True)
class NoiseSpec:
    blocks: tuple[int, ...] = PERTURBED_BLOCKS
    sigma_scale: float = NOISE_SIGMA_SCALE


@dataclass(frozen=True)
class ConditionConfig:
    condition: str
    temperature: float
    top_k: int
    prompt_set: tuple[str, ...]
    prune_spec: PruneSpec | None = None
    noise_spec: NoiseSpec | None = None
    n_trials: int = 15
    gen_len: int = 256

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise CaptureConfigError(f"unknown condition {self.condition!r}")
        expected = _SAMPLING[self.condition]
        if (self.temperature, self.top_k) != expected:
            raise CaptureConfigError(
                f"{self.condition} requires (temperature, top_k) = {expected}, "
                f"got ({self.temperature}, {self.top_k})"
            )
        if not self.prompt_set:
            raise CaptureConfigError(f"{self.condition}: empty prompt set")
        if self.n_trials < 1 or self.gen_len < 1:
            raise CaptureConfigError("n_trials and gen_len must be positive")


def load_prompts(name: str) -> tuple[str, ...]:
    """Read a packaged prompt file (one prompt per line, # comments)."""
    text = resources.files("psidyn_capture").joinpath(f"prompts/{name}.txt").read_text(
        encoding="utf-8"
    )
    prompts = tuple(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )
    if not prompts:
        raise CaptureConfigError(f"prompt file {name}.txt has no prompts")
    return prompts


def condition_config(condition: str, n_trials: int = 15,
                     gen_len: int = 256) -> ConditionConfig:
    """Preset configuration for one of the five conditions."""
    if condition not in CONDITIONS:
        raise CaptureConfigError(
            f"unknown condition {condition!r}; expected one of {CONDITIONS}"
        )
    temperature, top_k = _SAMPLING[condition]
    complex_prompts = load_prompts("complex")
    kw: dict = {}
    if condition == "intact_repetition":
        prompts = load_prompts("repetition")
    else:
        prompts = complex_prompts
    if condition == "damaged_heads":
        kw["prune_spec"] = PruneSpec()
    elif condition == "damaged_noise":
        kw["noise_spec"] = NoiseSpec()
    return ConditionConfig(
        condition=condition,
        temperature=temperature,
        top_k=top_k,
        prompt_set=prompts,
        n_trials=n_trials,
        gen_len=gen_len,
        **kw,
    )
