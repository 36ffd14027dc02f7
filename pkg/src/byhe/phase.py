"""Instantaneous phase and phase self-similarity label matrices.

The label pipeline turns a raw pulse wave into a square matrix whose (i, j)
entry is the cosine of the phase difference between instants i and j.  Any
constant phase offset, and hence any unknown acquisition delay of the label
wave, cancels in the difference: the matrix depends only on the rhythm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Wave
from .filters import AnalyticWave, BandpassSpec, analytic_signal, butter_bandpass, cwt_filter

_TWO_PI = 2.0 * np.pi

DEFAULT_WINDOW_LEN = 11

WAVE_KINDS = ("bvp", "ecg")


@dataclass(frozen=True, eq=False)
class PhaseSeries:
    """Instantaneous phase per sample, wrapped to [0, 2*pi)."""

    phase: np.ndarray
    fs: float

    def __post_init__(self):
        phase = np.asarray(self.phase, dtype=float)
        if phase.ndim != 1 or phase.size == 0:
            raise ValueError("phase must be a non-empty 1-D array")
        if np.any(phase < 0) or np.any(phase >= _TWO_PI):
            raise ValueError("phase values must lie in [0, 2*pi)")
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.phase.size


def default_center_offset(window_len: int = DEFAULT_WINDOW_LEN, conv_margin: int = 0) -> int:
    """Index of the first sliding-window center: aligns label rows with head rows.

    A length-L window starting at frame i is centered on frame i + (L-1)/2;
    conv_margin accounts for frames a temporal-convolution front end would
    consume before the windows (0 here, kept for alignment bookkeeping).
    """
    return (window_len - 1) // 2 + conv_margin // 2


def instantaneous_phase(a: AnalyticWave) -> PhaseSeries:
    """Four-quadrant phase of the analytic signal, wrapped to [0, 2*pi)."""
    envelope = a.envelope
    if np.mean(envelope < 1e-12) > 0.01:
        raise ValueError("degenerate input: envelope is near zero on more than 1% of samples")
    phase = np.mod(np.arctan2(a.im, a.re), _TWO_PI)
    # mod can round to exactly 2*pi for angles just below zero
    phase[phase >= _TWO_PI] = 0.0
    return PhaseSeries(phase, a.fs)


def label_matrix(p: PhaseSeries, indices) -> np.ndarray:
    """Cosine of pairwise phase differences at the given sample indices.

    Symmetric with unit diagonal by construction.  Adding a constant to all
    phases (mod 2*pi) leaves the result unchanged: that cancellation is the
    delay invariance the whole labeling scheme rests on.
    """
    idx = np.asarray(indices, dtype=int)
    if idx.ndim != 1 or idx.size < 2:
        raise ValueError("need at least 2 indices")
    if np.any(np.diff(idx) <= 0):
        raise ValueError("indices must be strictly ascending")
    if idx[0] < 0 or idx[-1] >= len(p):
        raise ValueError(f"index out of bounds for phase series of length {len(p)}")
    ph = p.phase[idx]
    return np.cos(ph[:, None] - ph[None, :])


def make_label(raw: Wave, kind: str = "bvp", n_out: int = 64, center_offset: int | None = None,
               bandpass: BandpassSpec | None = None) -> np.ndarray:
    """Full label chain: band-pass, wavelet narrow-banding, phase, similarity matrix.

    kind tags the source waveform family ("bvp" or "ecg"); both run the same
    chain, spiky inputs simply lean harder on the narrow-banding stage.  The
    matrix is built at n_out consecutive sample indices starting at
    center_offset (default: the first sliding-window center), so it lines up
    row-for-row with a head output over the same frames.
    """
    if kind.lower() not in WAVE_KINDS:
        raise ValueError(f"kind must be one of {WAVE_KINDS}, got {kind!r}")
    if n_out < 2:
        raise ValueError("n_out must be >= 2")
    if center_offset is None:
        center_offset = default_center_offset()
    if center_offset < 0:
        raise ValueError("center_offset must be >= 0")
    if raw.duration < n_out / raw.fs + 2.0:
        raise ValueError("wave too short: need n_out/fs plus a 2 s guard")
    filtered = cwt_filter(butter_bandpass(raw, bandpass))
    phase = instantaneous_phase(analytic_signal(filtered))
    indices = center_offset + np.arange(n_out)
    if indices[-1] >= len(phase):
        raise ValueError("center_offset + n_out exceeds the wave length")
    return label_matrix(phase, indices)


def check_sim_matrix(m, atol: float = 1e-9) -> np.ndarray:
    """Validate similarity-matrix invariants; returns the array on success."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("similarity matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("similarity matrix must be finite")
    if np.any(np.abs(m) > 1.0 + atol):
        raise ValueError("similarity values must lie in [-1, 1]")
    if np.max(np.abs(m - m.T)) >= atol:
        raise ValueError("similarity matrix must be symmetric")
    if np.max(np.abs(np.diag(m) - 1.0)) >= atol:
        raise ValueError("similarity matrix must have a unit diagonal")
    return m
