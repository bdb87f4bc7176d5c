"""Phase-synchronisation variability over a multichannel trial.

At each token step the channel phases are collapsed into the Kuramoto
order parameter R(t) = |mean_i exp(i * theta_i(t))|, which is 1 under
full alignment and 0 under uniform dispersion. The metastability score
is the temporal (population) standard deviation of R(t): high when the
system alternates between synchronised and desynchronised states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PreprocessedTrial
from .errors import ConfigError, DataError
from .phase import BandpassSpec, analytic_phase, design_butterworth_bandpass, filtfilt


@dataclass(frozen=True)
class SyncSeries:
    """Order-parameter series over the analysis window and its spread."""

    r: np.ndarray
    m: float

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.min() < 0.0 or r.max() > 1.0:
            raise DataError("order parameter out of [0, 1]")
        if abs(self.m - float(np.std(r))) > 1e-12:
            raise DataError("m is not the population std of r")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


def kuramoto_r(phases: np.ndarray) -> float:
    """Magnitude of the channel-mean unit phasor.

    Exact summation keeps the value invariant under channel
    permutation.
    """
    phases = np.asarray(phases, dtype=np.float64)
    if phases.ndim != 1 or phases.size < 2:
        raise ConfigError("kuramoto_r needs a 1-D vector of >= 2 phases")
    if not np.all(np.isfinite(phases)):
        raise DataError("non-finite phase")
    c = math.fsum(np.cos(phases)) / phases.size
    s = math.fsum(np.sin(phases)) / phases.size
    return min(math.hypot(c, s), 1.0)


def metastability_trial(
    trial: PreprocessedTrial,
    band: BandpassSpec = BandpassSpec(),
    trim: int = 0,
) -> SyncSeries:
    """Filter, extract phases, and score synchrony variability.

    ``trim`` drops that many samples from each end of R(t) before the
    spread is taken (sensitivity check for filter edge transients);
    the default keeps the full series.
    """
    if trim < 0 or (trim and trial.t - 2 * trim < 2):
        raise ConfigError(f"trim={trim} leaves fewer than 2 samples of T={trial.t}")
    coeffs = design_butterworth_bandpass(band)
    filtered = filtfilt(coeffs, trial.data, axis=0)
    theta = analytic_phase(filtered, axis=0)
    r = np.empty(trial.t)
    for i in range(trial.t):
        r[i] = kuramoto_r(theta[i])
    if trim:
        r = r[trim:-trim]
    return SyncSeries(r=r, m=float(np.std(r)))
