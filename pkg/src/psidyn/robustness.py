"""Stability of the composite index under recording perturbations.

Three rerun schemes: restrict to early or late blocks, randomly
subsample a fraction of channels (same columns across all trials of a
run), or repeat the 50% subsample over several seeds. Every rerun
re-normalises within its own pool, so values are comparable within a
run but not across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ActivationTrial, condition_sort_key, restrict_channels
from .errors import ArityError, ConfigError, MetadataError
from .pipeline import DEFAULT_CONFIG, RunConfig, analyze_pool

EARLY_BLOCKS = frozenset({1, 4})
LATE_BLOCKS = frozenset({7, 10})


@dataclass(frozen=True)
class RobustnessRun:
    label: str
    mean_psi: dict[str, float]  # condition -> mean composite
    n_trials: dict[str, int]


@dataclass(frozen=True)
class RobustnessReport:
    mode: str  # layers | subsample | seeds
    runs: tuple[RobustnessRun, ...]
    cross_seed_std: dict[str, float] | None
    ordering_stable: bool | None
    low_n: bool


def _condition_means(trials, psis) -> tuple[dict[str, float], dict[str, int]]:
    by: dict[str, list[float]] = {}
    for p in psis:
        by.setdefault(p.condition, []).append(p.psi)
    means = {
        c: math.fsum(v) / len(v)
        for c, v in sorted(by.items(), key=lambda kv: condition_sort_key(kv[0]))
    }
    return means, {c: len(by[c]) for c in means}


def _ordering_stable(runs: Sequence[RobustnessRun]) -> bool | None:
    """Top condition is intact_complex and bottom is intact_repetition
    in every run; None when those conditions are absent."""
    stable = True
    for run in runs:
        if "intact_complex" not in run.mean_psi or "intact_repetition" not in run.mean_psi:
            return None
        top = max(run.mean_psi, key=run.mean_psi.get)
        bottom = min(run.mean_psi, key=run.mean_psi.get)
        stable &= top == "intact_complex" and bottom == "intact_repetition"
    return stable


def _run(trials, label, config) -> tuple[RobustnessRun, list]:
    scores, psis = analyze_pool(list(trials), config)
    means, counts = _condition_means(trials, psis)
    return RobustnessRun(label=label, mean_psi=means, n_trials=counts), psis


def layer_subset_run(
    trials: Sequence[ActivationTrial],
    subset: str,
    config: RunConfig = DEFAULT_CONFIG,
) -> tuple[RobustnessRun, list]:
    """Rerun the pipeline on one depth subset of the recorded blocks.

    ``all`` keeps the trials untouched (and must reproduce the main
    pipeline exactly); ``early``/``late`` keep the 64 channels of
    blocks {1,4} / {7,10}.
    """
    if subset == "all":
        return _run(trials, "all", config)
    try:
        wanted = {"early": EARLY_BLOCKS, "late": LATE_BLOCKS}[subset]
    except KeyError:
        raise ConfigError(f"unknown layer subset {subset!r}") from None
    restricted = []
    for trial in trials:
        blocks = trial.channel_blocks()  # raises MetadataError w/o attribution
        cols = np.nonzero(np.isin(blocks, list(wanted)))[0]
        if cols.size == 0:
            raise MetadataError(
                f"trial {trial.trial_id}: no channels in blocks {sorted(wanted)}"
            )
        kept_blocks = tuple(b for b in trial.block_ids if b in wanted)
        restricted.append(restrict_channels(trial, cols, block_ids=kept_blocks))
    return _run(restricted, subset, config)


def layer_subset_report(
    trials: Sequence[ActivationTrial],
    config: RunConfig = DEFAULT_CONFIG,
    subsets: Sequence[str] = ("early", "late", "all"),
) -> RobustnessReport:
    runs = tuple(layer_subset_run(trials, s, config)[0] for s in subsets)
    return RobustnessReport(
        mode="layers",
        runs=runs,
        cross_seed_std=None,
        ordering_stable=_ordering_stable(runs),
        low_n=any(n < 2 for run in runs for n in run.n_trials.values()),
    )


def _subsample_columns(c: int, fraction: float, seed: int) -> np.ndarray:
    k = int(fraction * c)
    if k < 8:
        raise ArityError(f"{fraction:.0%} of {c} channels keeps {k} (< 8)")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(c, size=k, replace=False))


def channel_subsample_run(
    trials: Sequence[ActivationTrial],
    fraction: float,
    seeds: Sequence[int],
    config: RunConfig = DEFAULT_CONFIG,
    mode: str = "subsample",
) -> RobustnessReport:
    """Rerun on random channel subsets, one run per seed.

    Each run draws ``floor(fraction * C)`` columns without replacement
    (shared across all trials of that run) and re-normalises within
    its own pool. Cross-seed dispersion is the sample std of the
    per-condition means.
    """
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    if not seeds:
        raise ConfigError("need at least one seed")
    trials = list(trials)
    c = trials[0].c
    runs = []
    for seed in seeds:
        if fraction == 1.0:
            run, _ = _run(trials, f"f1.00-s{seed}", config)
        else:
            cols = _subsample_columns(c, fraction, int(seed))
            restricted = [restrict_channels(t, cols) for t in trials]
            run, _ = _run(restricted, f"f{fraction:.2f}-s{seed}", config)
        runs.append(run)
    conditions = list(runs[0].mean_psi)
    if len(runs) > 1:
        spread = {
            cond: float(np.std([r.mean_psi[cond] for r in runs], ddof=1))
            for cond in conditions
        }
    else:
        spread = {cond: 0.0 for cond in conditions}
    return RobustnessReport(
        mode=mode,
        runs=tuple(runs),
        cross_seed_std=spread,
        ordering_stable=_ordering_stable(runs),
        low_n=any(n < 2 for run in runs for n in run.n_trials.values()),
    )


def multi_seed_run(
    trials: Sequence[ActivationTrial],
    config: RunConfig = DEFAULT_CONFIG,
    fraction: float = 0.5,
    n_seeds: int = 5,
    base_seed: int = 0,
) -> RobustnessReport:
    """Seed-robustness protocol: 50% channel subsamples, five seeds."""
    if n_seeds < 1:
        raise ConfigError(f"n_seeds must be >= 1, got {n_seeds}")
    seeds = [base_seed + i for i in range(n_seeds)]
    return channel_subsample_run(trials, fraction, seeds, config, mode="seeds")
