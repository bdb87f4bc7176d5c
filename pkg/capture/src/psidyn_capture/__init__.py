"""Transformer activation capture into psidyn trial files."""

from .conditions import (
    CONDITIONS,
    ConditionConfig,
    NoiseSpec,
    PruneSpec,
    condition_config,
    load_prompts,
)
from .errors import CaptureConfigError, CaptureError, GenerationError
from .modeling import ByteTokenizer, LoadedModel, PINNED_MODEL, load_model
from .perturb import apply_head_pruning, apply_weight_noise, iter_noise_targets
from .recorder import (
    PER_BLOCK_CHANNELS,
    RECORDING_BLOCKS,
    RecordedTrial,
    record_trial,
    run_capture,
    select_channels,
)

__version__ = "0.1.0"
