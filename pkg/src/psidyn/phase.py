"""Band isolation and instantaneous phase extraction.

A Butterworth bandpass (analog prototype, bilinear transform with
band-edge prewarping) is applied forward-backward for zero phase
distortion, then the analytic signal gives each channel's phase.
Frequencies are in cycles per token at a fixed 1 sample/token rate,
so Nyquist is 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .errors import ConfigError, DataError, DegenerateDataError, NumericError

DEFAULT_LOW_CUT = 0.05
DEFAULT_HIGH_CUT = 0.15

#: Candidate bands for sensitivity reruns (cycles/token).
ALTERNATE_BANDS = ((0.03, 0.10), (0.05, 0.15), (0.10, 0.25))


@dataclass(frozen=True)
class BandpassSpec:
    low_cut: float = DEFAULT_LOW_CUT
    high_cut: float = DEFAULT_HIGH_CUT
    order: int = 3
    sample_rate: float = 1.0

    def __post_init__(self):
        nyquist = self.sample_rate / 2.0
        if not (0.0 < self.low_cut < self.high_cut < nyquist):
            raise ConfigError(
                f"need 0 < low < high < {nyquist} (Nyquist), got "
                f"({self.low_cut}, {self.high_cut})"
            )
        if self.order < 1:
            raise ConfigError(f"filter order must be >= 1, got {self.order}")
        if self.high_cut / self.low_cut < 1.01:
            raise ConfigError(
                f"band ({self.low_cut}, {self.high_cut}) too narrow for a "
                "stable design"
            )

    @property
    def n_coefficients(self) -> int:
        return 2 * self.order + 1

    def min_signal_length(self) -> int:
        """filtfilt padding needs strictly more samples than this."""
        return 3 * self.n_coefficients


@dataclass(frozen=True)
class IirCoefficients:
    b: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))

    def response_at(self, freq: float, sample_rate: float = 1.0) -> complex:
        """Transfer function value at the given frequency."""
        z = np.exp(2j * np.pi * freq / sample_rate)
        return complex(np.polyval(self.b, z) / np.polyval(self.a, z))


def design_butterworth_bandpass(spec: BandpassSpec) -> IirCoefficients:
    """Digital Butterworth bandpass with -3 dB points at the band edges."""
    b, a = _sig.butter(
        spec.order,
        [spec.low_cut, spec.high_cut],
        btype="bandpass",
        fs=spec.sample_rate,
    )
    poles = np.roots(a)
    if np.any(np.abs(poles) >= 1.0):
        raise NumericError(
            f"unstable design for band ({spec.low_cut}, {spec.high_cut}): "
            f"max pole magnitude {np.abs(poles).max():.6f}"
        )
    return IirCoefficients(b=b, a=a)


def filtfilt(coeffs: IirCoefficients, signal: np.ndarray, axis: int = 0) -> np.ndarray:
    """Zero-phase forward-backward filtering.

    Uses odd-reflection padding of 3x the coefficient count at both
    ends, so the input must be longer than that along ``axis``.
    """
    signal = np.asarray(signal, dtype=np.float64)
    pad = 3 * len(coeffs.a)
    if signal.shape[axis] <= pad:
        raise DataError(
            f"signal length {signal.shape[axis]} too short for zero-phase "
            f"filtering (needs > {pad})"
        )
    return _sig.filtfilt(coeffs.b, coeffs.a, signal, axis=axis,
                         padtype="odd", padlen=pad)


def analytic_phase(signal: np.ndarray, axis: int = 0) -> np.ndarray:
    """Instantaneous phase of the analytic signal, in (-pi, pi].

    The analytic signal is built in the frequency domain: negative
    bins zeroed, positive bins doubled, DC (and Nyquist for even
    lengths) kept at unit weight; its argument is the phase.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[axis] < 8:
        raise DataError(f"need at least 8 samples, got {signal.shape[axis]}")
    if not np.all(np.any(signal != 0.0, axis=axis)):
        raise DegenerateDataError("all-zero signal has undefined phase")
    theta = np.angle(_sig.hilbert(signal, axis=axis))
    # np.angle can emit -pi on signed-zero imaginary parts
    theta[theta == -np.pi] = np.pi
    return theta
