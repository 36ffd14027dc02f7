"""Synthetic signals and closed-form oracles.

Every verification in this package leans on these generators: pulse-like
waves with a slow envelope and a second harmonic, spike-train waves with the
sharp-harmonic structure of electrode recordings, phasor feature sequences
standing in for backbone activations, and the exact cosine matrix a perfect
pipeline would produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Wave

#: frame rate feature sequences are generated at
FEATURE_FS = 30.0

#: width of the spike in the electrode-like generator (full width at half maximum)
_SPIKE_FWHM_S = 0.040
_FWHM_TO_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))

# late-bump placement: one fifth of a period after the spike; at one sixth the
# bump's third harmonic lands in antiphase with the spike's and cancels it,
# which would defeat the sharp-harmonics contract
_BUMP_DELAY_FRAC = 0.2
_BUMP_AMPLITUDE = 0.55
_BUMP_SIGMA_FRAC = 0.08


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic pulse wave.

    The envelope frequency is capped well below the beat frequency so the
    envelope never masquerades as the rhythm itself.
    """

    bpm: float
    duration: float
    fs: float
    phase0: float = 0.0
    envelope_depth: float = 0.0
    envelope_freq: float = 0.1
    noise_snr_db: float | None = None
    harmonic2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 42.0 <= self.bpm <= 240.0:
            raise ValueError("bpm must lie in [42, 240]")
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if self.fs <= 0:
            raise ValueError("fs must be > 0")
        if not 0.0 <= self.envelope_depth < 1.0:
            raise ValueError("envelope_depth must lie in [0, 1)")
        if not self.envelope_freq < 0.2 * self.bpm / 60.0:
            raise ValueError("envelope_freq must stay below 0.2 * beat frequency")
        if not 0.0 <= self.harmonic2 < 1.0:
            raise ValueError("harmonic2 must lie in [0, 1)")


def _time_grid(spec: SynthSpec) -> np.ndarray:
    n = int(round(spec.duration * spec.fs))
    if n < 2:
        raise ValueError("duration * fs must give at least 2 samples")
    return np.arange(n) / spec.fs


def _add_noise(x: np.ndarray, spec: SynthSpec) -> np.ndarray:
    if spec.noise_snr_db is None:
        return x
    rms = np.sqrt(np.mean(x**2))
    sigma = rms / 10.0 ** (spec.noise_snr_db / 20.0)
    rng = np.random.default_rng(spec.seed)
    return x + sigma * rng.standard_normal(x.size)


def synth_bvp(spec: SynthSpec) -> Wave:
    """Pulse-like wave: enveloped cosine plus an optional second harmonic.

    (1 + depth*sin(2*pi*f_env*t)) * [cos(2*pi*f*t + phase0)
                                     + harmonic2*cos(4*pi*f*t + 2*phase0)]
    with seeded Gaussian noise at the requested SNR.
    """
    t = _time_grid(spec)
    f = spec.bpm / 60.0
    carrier = np.cos(2.0 * np.pi * f * t + spec.phase0)
    if spec.harmonic2 > 0:
        carrier = carrier + spec.harmonic2 * np.cos(4.0 * np.pi * f * t + 2.0 * spec.phase0)
    envelope = 1.0 + spec.envelope_depth * np.sin(2.0 * np.pi * spec.envelope_freq * t)
    return Wave(_add_noise(envelope * carrier, spec), spec.fs)


def synth_ecg_like(spec: SynthSpec) -> Wave:
    """Spike-train wave: narrow periodic Gaussian spikes plus a small late bump.

    The 40 ms spikes put strong energy on the second and third harmonics (at
    least 10% of the fundamental each), which is exactly what makes such
    waves sticky to filter and worth testing separately.
    """
    t = _time_grid(spec)
    period = 60.0 / spec.bpm
    t0 = spec.phase0 / (2.0 * np.pi) * period
    sigma_spike = _SPIKE_FWHM_S / _FWHM_TO_SIGMA

    def periodic_bump(delay, sigma, amplitude):
        tau = np.mod(t - t0 - delay, period)
        dist = np.minimum(tau, period - tau)
        return amplitude * np.exp(-0.5 * (dist / sigma) ** 2)

    x = periodic_bump(0.0, sigma_spike, 1.0)
    x = x + periodic_bump(_BUMP_DELAY_FRAC * period, _BUMP_SIGMA_FRAC * period, _BUMP_AMPLITUDE)
    return Wave(_add_noise(x, spec), spec.fs)


def synth_features(bpm: float, frames: int, dims: int, delay_frames: float = 0.0,
                   noise_sigma: float = 0.0, seed: int = 0) -> np.ndarray:
    """Phasor feature sequence: row t = [cos(theta_t), sin(theta_t), noise...].

    theta_t = 2*pi*(bpm/60)*(t + delay_frames)/FEATURE_FS.  A unit phasor is
    the minimal structure whose cosine similarity equals the cosine of the
    phase difference, so closed-form assertions stay available.  noise_sigma
    adds seeded Gaussian noise to every dimension (the trailing dims - 2
    columns are pure noise).
    """
    if dims < 2:
        raise ValueError("dims must be >= 2")
    if frames < 30:
        raise ValueError("frames must be >= 30")
    if bpm <= 0:
        raise ValueError("bpm must be > 0")
    t = np.arange(frames, dtype=float)
    theta = 2.0 * np.pi * (bpm / 60.0) * (t + delay_frames) / FEATURE_FS
    rng = np.random.default_rng(seed)
    features = noise_sigma * rng.standard_normal((frames, dims)) if noise_sigma > 0 else np.zeros((frames, dims))
    features[:, 0] += np.cos(theta)
    features[:, 1] += np.sin(theta)
    return features


def oracle_label_matrix(bpm: float, fs: float, n: int) -> np.ndarray:
    """The exact target: values[i, j] = cos(2*pi*(bpm/60)*(i - j)/fs)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    idx = np.arange(n, dtype=float)
    delta = idx[:, None] - idx[None, :]
    return np.cos(2.0 * np.pi * (bpm / 60.0) * delta / fs)
