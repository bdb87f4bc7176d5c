"""Synthetic ground-truth generators for validating the estimators.

Everything here is seeded through ``numpy.random.default_rng``;
per-trial streams are derived as ``default_rng([seed, *stream])`` so a
whole battery regenerates bit-identically from one master seed.

Generators:

* fractional Gaussian noise with exact target autocovariance
  (circulant embedding), the oracle for the scaling-exponent
  estimator;
* all-to-all Kuramoto oscillator networks (mean-field Euler updates,
  one step per token), the oracle for the synchrony metrics;
* white noise, random walks, and jittered periodic patterns;
* "condition analogues" that mimic the qualitative dynamics of the
  five experimental regimes for end-to-end pipeline tests.
"""

from __future__ import annotations

import numpy as np

from .core import ActivationTrial, CONDITIONS, DEFAULT_BLOCKS
from .errors import ConfigError, NumericError

#: Centre of the default analysis band, in rad/token (0.1 cycles/token).
BAND_CENTRE_OMEGA = 2.0 * np.pi * 0.1

#: Natural-frequency spread of the oscillator analogues (rad/token).
ANALOGUE_FREQ_SPREAD = 0.15

#: Near-critical coupling for a Gaussian frequency spread: the
#: classical all-to-all threshold is ~1.6 * spread, and metastability
#: (fluctuation of the order parameter) peaks just above it.
NEAR_CRITICAL_FACTOR = 1.8

#: Coupling attenuation applied to the two perturbation analogues.
DAMAGED_COUPLING_FACTORS = {"damaged_heads": 0.45, "damaged_noise": 0.60}

ANALOGUE_HURST = 0.72
ANALOGUE_MIX = 0.8
REPETITION_JITTER = 0.1


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def near_critical_coupling(freq_spread: float = ANALOGUE_FREQ_SPREAD) -> float:
    return NEAR_CRITICAL_FACTOR * freq_spread


def gen_fgn(hurst: float, t: int, seed) -> np.ndarray:
    """Fractional Gaussian noise with unit marginal variance.

    Circulant embedding of the target autocovariance
    gamma(k) = 0.5 (|k+1|^2H - 2|k|^2H + |k-1|^2H) in a ring of size
    2t, synthesised by frequency-domain sampling, so the sample
    covariance structure is exact (not asymptotic).
    """
    if not (0.0 < hurst < 1.0):
        raise ConfigError(f"hurst must be in (0, 1), got {hurst}")
    if t < 2:
        raise ConfigError(f"need t >= 2, got {t}")
    rng = _rng(seed)
    k = np.arange(t + 1, dtype=np.float64)
    gamma = 0.5 * (
        np.abs(k + 1.0) ** (2 * hurst)
        - 2.0 * np.abs(k) ** (2 * hurst)
        + np.abs(k - 1.0) ** (2 * hurst)
    )
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # size 2t
    lam = np.fft.fft(row).real
    if lam.min() < -1e-8:
        raise NumericError(
            f"circulant embedding failed for H={hurst}: eigenvalue {lam.min():.3g}"
        )
    lam = np.clip(lam, 0.0, None)
    m = 2 * t
    z = np.empty(m, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[t] = rng.standard_normal()
    halves = rng.standard_normal((2, t - 1))
    z[1:t] = (halves[0] + 1j * halves[1]) / np.sqrt(2.0)
    z[t + 1 :] = np.conj(z[1:t][::-1])
    x = np.fft.ifft(np.sqrt(lam) * z) * np.sqrt(m)
    return np.ascontiguousarray(x.real[:t])


def gen_fgn_matrix(hurst: float, t: int, c: int, seed) -> np.ndarray:
    """(t, c) matrix of independent unit-variance fGn channels."""
    rng = _rng(seed)
    return np.stack([gen_fgn(hurst, t, rng) for _ in range(c)], axis=1)


def gen_white(t: int, c: int, seed) -> np.ndarray:
    return _rng(seed).standard_normal((t, c))


def gen_random_walk(t: int, c: int, seed) -> np.ndarray:
    return np.cumsum(gen_white(t, c, seed), axis=0)


def gen_periodic(period: int, t: int, c: int, seed,
                 jitter: float = REPETITION_JITTER) -> np.ndarray:
    """Tiled random pattern of the given period plus small jitter."""
    if period < 2:
        raise ConfigError(f"period must be >= 2, got {period}")
    rng = _rng(seed)
    pattern = rng.standard_normal((period, c))
    reps = -(-t // period)
    x = np.tile(pattern, (reps, 1))[:t]
    return x + jitter * rng.standard_normal((t, c))


def gen_kuramoto(
    c: int,
    coupling: float,
    freq_spread: float,
    t: int,
    seed,
    burn_in: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate an all-to-all Kuramoto network; returns (phases, signals).

    d theta_i/dt = omega_i + (K/c) sum_j sin(theta_j - theta_i),
    integrated by forward Euler with a 1-token step. The pairwise sum
    is evaluated through the mean-field identity
    (K/c) sum_j sin(theta_j - theta_i) = K R sin(psi - theta_i).
    Natural frequencies are Gaussian around the analysis band centre;
    initial phases uniform. The default records from the random start
    (near criticality the synchronisation transient is itself a source
    of order-parameter fluctuation); pass ``burn_in`` to start the
    window past it.
    """
    if c < 8:
        raise ConfigError(f"need >= 8 oscillators, got {c}")
    if coupling < 0.0:
        raise ConfigError(f"coupling must be >= 0, got {coupling}")
    if burn_in < 0:
        raise ConfigError(f"burn_in must be >= 0, got {burn_in}")
    rng = _rng(seed)
    omega = rng.normal(BAND_CENTRE_OMEGA, freq_spread, size=c)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=c)
    phases = np.empty((t, c))
    for step in range(t + burn_in):
        if step >= burn_in:
            phases[step - burn_in] = theta
        z = np.exp(1j * theta).mean()
        r, psi = np.abs(z), np.angle(z)
        theta = theta + omega + coupling * r * np.sin(psi - theta)
    return phases, np.cos(phases)


# ---------------------------------------------------------------------------
# condition analogues
# ---------------------------------------------------------------------------


def _analogue_matrix(analogue: str, t: int, c: int, rng: np.random.Generator) -> np.ndarray:
    if analogue == "intact_complex" or analogue in DAMAGED_COUPLING_FACTORS:
        factor = DAMAGED_COUPLING_FACTORS.get(analogue, 1.0)
        base = gen_fgn_matrix(ANALOGUE_HURST, t, c, rng)
        coupling = factor * near_critical_coupling()
        # burn past the transient so trials are stationary-ish and the
        # coupling factor alone drives the metastability differences
        _, shared = gen_kuramoto(c, coupling, ANALOGUE_FREQ_SPREAD, t, rng,
                                 burn_in=64)
        return base + ANALOGUE_MIX * shared
    if analogue == "intact_noisy":
        return rng.standard_normal((t, c))
    if analogue == "intact_repetition":
        period = int(rng.integers(4, 9))
        return gen_periodic(period, t, c, rng)
    raise ConfigError(f"unknown condition analogue {analogue!r}")


def gen_condition_analogue(analogue: str, t: int = 256, c: int = 128,
                           seed=0) -> ActivationTrial:
    """Synthetic trial mimicking one experimental regime.

    * intact_complex: persistent noise plus a shared near-critical
      oscillator component (high integration, high metastability);
    * damaged_heads / damaged_noise: same recipe with the shared
      component's coupling attenuated (integration preserved,
      metastability reduced);
    * intact_noisy: white noise (uncorrelated, middling synchrony
      fluctuation);
    * intact_repetition: short-period patterns with tiny jitter
      (phase-locked, minimal metastability).
    """
    if analogue not in CONDITIONS:
        raise ConfigError(
            f"unknown condition analogue {analogue!r}; expected one of {CONDITIONS}"
        )
    if c % len(DEFAULT_BLOCKS) != 0:
        raise ConfigError(
            f"c={c} must be divisible by {len(DEFAULT_BLOCKS)} blocks"
        )
    seed = int(seed)
    rng = np.random.default_rng([seed, CONDITIONS.index(analogue)])
    data = _analogue_matrix(analogue, t, c, rng)
    return ActivationTrial(
        trial_id=f"{analogue}-s{seed}",
        condition=analogue,
        data=data,
        block_ids=DEFAULT_BLOCKS,
        channel_indices=tuple(range(c)),
        seed=seed,
    )


def gen_battery(trials_per_condition: int = 15, t: int = 256, c: int = 128,
                seed: int = 0) -> list[ActivationTrial]:
    """Five-analogue trial set with per-trial derived seeds.

    Trial k of condition i uses the stream ``[seed, i, k]``, so any
    single trial can be regenerated in isolation.
    """
    if trials_per_condition < 1:
        raise ConfigError("trials_per_condition must be >= 1")
    trials = []
    for ci, cond in enumerate(CONDITIONS):
        for k in range(trials_per_condition):
            rng = np.random.default_rng([int(seed), ci, k])
            data = _analogue_matrix(cond, t, c, rng)
            trials.append(
                ActivationTrial(
                    trial_id=f"{cond}-{k:03d}",
                    condition=cond,
                    data=data,
                    block_ids=DEFAULT_BLOCKS,
                    channel_indices=tuple(range(c)),
                    seed=int(seed),
                )
            )
    return trials
