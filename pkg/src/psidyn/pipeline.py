"""Per-trial analysis and pooled composite scoring.

The per-trial stage (preprocess -> integration -> metastability) is
pure and fans out across a thread pool; results are gathered back in
input order before pooling, so outputs are independent of the thread
count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .composite import (
    ComponentScores,
    DEFAULT_WEIGHTS,
    PsiResult,
    PsiWeights,
    pool_zscore,
)
from .core import ActivationTrial, preprocess
from .dfa import DfaConfig, dfa_trial
from .errors import ConfigError, PsidynError
from .metastability import metastability_trial
from .phase import BandpassSpec


@dataclass(frozen=True)
class RunConfig:
    """Everything a batch run needs besides the trials themselves."""

    band: BandpassSpec = field(default_factory=BandpassSpec)
    dfa: DfaConfig = field(default_factory=DfaConfig)
    weights: PsiWeights = DEFAULT_WEIGHTS
    q: float = 0.05
    output_dir: str | None = None
    threads: int = 0
    trim: int = 0

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ConfigError(f"q must be in (0, 1), got {self.q}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")
        if self.trim < 0:
            raise ConfigError(f"trim must be >= 0, got {self.trim}")

    def worker_count(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> dict:
        """Analysis parameters for provenance records.

        Thread count is execution detail, not provenance: outputs are
        byte-identical across thread counts and must stay that way.
        """
        return {
            "band": {
                "low_cut": self.band.low_cut,
                "high_cut": self.band.high_cut,
                "order": self.band.order,
                "sample_rate": self.band.sample_rate,
            },
            "dfa": {
                "window_sizes": list(self.dfa.window_sizes),
                "h_opt": self.dfa.h_opt,
                "sigma_h": self.dfa.sigma_h,
            },
            "weights": {"w_h": self.weights.w_h, "w_m": self.weights.w_m},
            "q": self.q,
            "trim": self.trim,
        }


DEFAULT_CONFIG = RunConfig()


def analyze_trial(trial: ActivationTrial, config: RunConfig = DEFAULT_CONFIG) -> ComponentScores:
    """Raw component metrics for a single trial (pool-free)."""
    prepped = preprocess(trial)
    dfa = dfa_trial(prepped, config.dfa)
    sync = metastability_trial(prepped, config.band, trim=config.trim)
    return ComponentScores(
        trial_id=trial.trial_id,
        condition=trial.condition,
        h_raw=dfa.h_raw,
        h_eff=dfa.h_eff,
        m=sync.m,
    )


def analyze_trials(
    trials: list[ActivationTrial], config: RunConfig = DEFAULT_CONFIG
) -> list[ComponentScores]:
    """Fan per-trial analysis out over threads; order-preserving.

    A failing trial aborts the batch, naming the trial.
    """

    def run(trial: ActivationTrial) -> ComponentScores:
        try:
            return analyze_trial(trial, config)
        except PsidynError as exc:
            exc.args = (f"trial {trial.trial_id}: {exc}",)
            raise

    workers = min(config.worker_count(), max(len(trials), 1))
    if workers <= 1:
        return [run(t) for t in trials]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, trials))


def analyze_pool(
    trials: list[ActivationTrial], config: RunConfig = DEFAULT_CONFIG
) -> tuple[list[ComponentScores], list[PsiResult]]:
    """Full pipeline: per-trial metrics, then pooled composite."""
    scores = analyze_trials(trials, config)
    return scores, pool_zscore(scores, config.weights)
