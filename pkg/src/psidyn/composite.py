"""Pooled normalisation of the component metrics and the composite index.

The integration and metastability components are z-scored against the
pooled trial set (population convention) and combined with fixed
weights, equal by default. The composite is therefore a relative
index: it is only meaningful alongside the identity of the pool it was
normalised against, and re-pooling changes the values (but not the
within-pool ranking).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArityError, ConfigError, DegenerateDataError

#: Pooled component spreads at or below this are degenerate.
DEGENERATE_POOL_SD = 1e-12


@dataclass(frozen=True)
class ComponentScores:
    """Raw per-trial metrics before pooling."""

    trial_id: str
    condition: str
    h_raw: float
    h_eff: float
    m: float

    def __post_init__(self):
        if not (0.0 < self.h_eff <= 1.0):
            raise ConfigError(f"h_eff must be in (0, 1], got {self.h_eff}")
        if self.m < 0.0:
            raise ConfigError(f"m must be non-negative, got {self.m}")


@dataclass(frozen=True)
class PsiResult:
    trial_id: str
    condition: str
    h_z: float
    m_z: float
    psi: float


@dataclass(frozen=True)
class PsiWeights:
    """Component weights; must be non-negative and sum to one."""

    w_h: float = 0.5
    w_m: float = 0.5

    def __post_init__(self):
        if self.w_h < 0.0 or self.w_m < 0.0:
            raise ConfigError(f"weights must be non-negative, got {self}")
        if abs(self.w_h + self.w_m - 1.0) > 1e-12:
            raise ConfigError(f"weights must sum to 1, got {self.w_h + self.w_m}")


DEFAULT_WEIGHTS = PsiWeights()


def psi_weights_override(w_h: float, w_m: float) -> PsiWeights:
    """Validated non-default weighting for sensitivity analyses."""
    return PsiWeights(w_h=w_h, w_m=w_m)


def pool_zscore(
    scores: list[ComponentScores],
    weights: PsiWeights = DEFAULT_WEIGHTS,
) -> list[PsiResult]:
    """Z-score both components against the pool and combine.

    Output order matches input order. Raises when either component is
    constant across the pool (all trials dynamically identical).
    """
    if len(scores) < 2:
        raise ArityError(f"pooled z-scoring needs >= 2 trials, got {len(scores)}")
    h = np.array([s.h_eff for s in scores], dtype=np.float64)
    m = np.array([s.m for s in scores], dtype=np.float64)
    h_sd = float(h.std())
    m_sd = float(m.std())
    if h_sd <= DEGENERATE_POOL_SD:
        raise DegenerateDataError(
            f"degenerate pool: integration spread {h_sd:.3g} across {len(scores)} trials"
        )
    if m_sd <= DEGENERATE_POOL_SD:
        raise DegenerateDataError(
            f"degenerate pool: metastability spread {m_sd:.3g} across {len(scores)} trials"
        )
    h_z = (h - h.mean()) / h_sd
    m_z = (m - m.mean()) / m_sd
    return [
        PsiResult(
            trial_id=s.trial_id,
            condition=s.condition,
            h_z=float(hz),
            m_z=float(mz),
            psi=weights.w_h * float(hz) + weights.w_m * float(mz),
        )
        for s, hz, mz in zip(scores, h_z, m_z)
    ]


def pool_identity(scores: list[ComponentScores]) -> list[str]:
    """Trial ids defining the normalisation pool, in pool order."""
    return [s.trial_id for s in scores]
