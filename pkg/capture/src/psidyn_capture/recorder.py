"""Activation recording during autoregressive generation.

Each trial: draw a prompt uniformly (with replacement) from the
condition's set, generate exactly ``gen_len`` tokens, and at every
generation step record the hidden state at the final token position
from the residual stream output of each recording block. A fixed
``channel_seed`` selects the recorded channels once; every trial in a
capture shares them.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .conditions import ConditionConfig, condition_config, CONDITIONS
from .errors import GenerationError
from .modeling import LoadedModel, load_model
from .perturb import apply_head_pruning, apply_weight_noise
from .trialfmt import write_manifest, write_trial

RECORDING_BLOCKS = (1, 4, 7, 10)
PER_BLOCK_CHANNELS = 32
MAX_GENERATION_ATTEMPTS = 3

#: How the recording taps the stream: output of each listed block
#: (block indices are 0-based positions in the stack).
RECORDING_POINT = "block-output residual stream, final token position"


def select_channels(hidden_size: int, channel_seed: int,
                    blocks=RECORDING_BLOCKS,
                    per_block: int = PER_BLOCK_CHANNELS) -> dict[int, np.ndarray]:
    """Per-block sorted channel choices, fixed by the channel seed."""
    rng = np.random.default_rng(int(channel_seed))
    return {
        block: np.sort(rng.choice(hidden_size, size=per_block, replace=False))
        for block in blocks
    }


def perturbed_model(loaded: LoadedModel, config: ConditionConfig,
                    perturb_seed: int) -> torch.nn.Module:
    """Condition-specific model variant (deep copy when perturbing)."""
    if config.prune_spec is None and config.noise_spec is None:
        return loaded.model
    model = copy.deepcopy(loaded.model)
    if config.prune_spec is not None:
        apply_head_pruning(model, config.prune_spec)
    if config.noise_spec is not None:
        apply_weight_noise(model, config.noise_spec, seed=perturb_seed)
    model.eval()
    return model


def _generate_hidden_states(model, input_ids: torch.Tensor, config: ConditionConfig,
                            trial_seed: int):
    """One sampled generation; returns per-step per-layer hidden states."""
    torch.manual_seed(int(trial_seed))
    with torch.no_grad():
        out = model.generate(
            input_ids,
            attention_mask=torch.ones_like(input_ids),
            do_sample=True,
            temperature=config.temperature,
            top_k=config.top_k,
            max_new_tokens=config.gen_len,
            min_new_tokens=config.gen_len,
            pad_token_id=0,
            output_hidden_states=True,
            return_dict_in_generate=True,
        )
    return out.hidden_states


@dataclass(frozen=True)
class RecordedTrial:
    trial_id: str
    condition: str
    data: np.ndarray  # (gen_len, n_blocks * per_block) float64
    channel_indices: tuple[int, ...]
    prompt_id: int
    trial_seed: int


def record_trial(
    model,
    config: ConditionConfig,
    channels: dict[int, np.ndarray],
    trial_seed: int,
    trial_index: int,
    tokenizer,
) -> RecordedTrial:
    """Generate once and collect the recorded activation matrix."""
    rng = np.random.default_rng([int(trial_seed), trial_index])
    prompt_id = int(rng.integers(0, len(config.prompt_set)))
    prompt = config.prompt_set[prompt_id]
    ids = tokenizer.encode(prompt)
    input_ids = torch.tensor([ids], dtype=torch.long)

    step_states = None
    for attempt in range(MAX_GENERATION_ATTEMPTS):
        states = _generate_hidden_states(model, input_ids, config,
                                         trial_seed + attempt * 1_000_003)
        if len(states) == config.gen_len:
            step_states = states
            break
    if step_states is None:
        raise GenerationError(
            f"{config.condition} trial {trial_index}: generation yielded "
            f"{len(states)} steps, needed {config.gen_len} "
            f"after {MAX_GENERATION_ATTEMPTS} attempts"
        )

    blocks = sorted(channels)
    columns = []
    for block in blocks:
        picked = channels[block]
        # hidden_states[step][0] is the embedding output; index b+1 is
        # the output of the 0-based block b. The last position is the
        # token being generated at that step.
        series = np.stack(
            [
                step_states[step][block + 1][0, -1, :].numpy()[picked]
                for step in range(config.gen_len)
            ]
        )
        columns.append(series)
    data = np.concatenate(columns, axis=1).astype(np.float64)
    channel_indices = tuple(int(i) for block in blocks for i in channels[block])
    return RecordedTrial(
        trial_id=f"{config.condition}-{trial_index:03d}",
        condition=config.condition,
        data=data,
        channel_indices=channel_indices,
        prompt_id=prompt_id,
        trial_seed=int(trial_seed),
    )


def run_capture(
    out_dir,
    conditions=CONDITIONS,
    n_trials: int = 15,
    gen_len: int = 256,
    channel_seed: int = 0,
    base_seed: int = 0,
    model_name: str = "gpt2-medium",
    allow_random_init: bool = True,
    hidden_size: int | None = None,
) -> Path:
    """Capture every condition and write trials plus one manifest.

    Returns the manifest path. Trial seeds derive from
    ``(base_seed, condition_index, trial_index)`` so any single trial
    can be re-recorded in isolation.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    loaded = load_model(model_name, allow_random_init=allow_random_init,
                        hidden_size=hidden_size)
    channels = select_channels(loaded.hidden_size, channel_seed)
    entries = []
    for cond_index, condition in enumerate(conditions):
        config = condition_config(condition, n_trials=n_trials, gen_len=gen_len)
        model = perturbed_model(loaded, config, perturb_seed=base_seed + cond_index)
        for k in range(n_trials):
            trial_seed = int(
                np.random.SeedSequence([base_seed, cond_index, k]).generate_state(1)[0]
            )
            trial = record_trial(model, config, channels, trial_seed, k,
                                 loaded.tokenizer)
            name = f"{trial.trial_id}.psia"
            write_trial(
                out / name,
                trial.data,
                trial_id=trial.trial_id,
                condition=trial.condition,
                block_ids=RECORDING_BLOCKS,
                channel_indices=trial.channel_indices,
                seed=trial.trial_seed,
                generation_params={
                    "temperature": config.temperature,
                    "top_k": config.top_k,
                    "prompt_id": trial.prompt_id,
                    "weights": loaded.weights,
                },
            )
            entries.append(
                {
                    "path": name,
                    "condition": condition,
                    "trial_seed": trial.trial_seed,
                    "prompt_id": trial.prompt_id,
                }
            )
    manifest_path = out / "manifest.json"
    write_manifest(
        manifest_path,
        entries,
        channel_seed=channel_seed,
        blocks=RECORDING_BLOCKS,
        per_block_channels=PER_BLOCK_CHANNELS,
        notes=(
            f"model={loaded.name} weights={loaded.weights} "
            f"weights_seed={loaded.weights_seed} base_seed={base_seed} "
            f"recording={RECORDING_POINT}"
        ),
    )
    return manifest_path
