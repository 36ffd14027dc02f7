"""Heart-rate extraction from similarity matrices and from waves.

A similarity matrix of a rhythmic signal is (near-)constant along each
diagonal; averaging every diagonal group collapses it into a 1-D profile
whose oscillation period is the heart period.  The profile is re-filtered
through the usual band-pass plus wavelet narrow-banding, and the rate is the
mean interval between detected peaks.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import EstimationError, Wave
from .filters import butter_bandpass, cwt_filter

#: a diagonal profile flatter than this peak-to-peak cannot carry a rhythm
_FLAT_PTP = 1e-8


def min_peak_distance(fs: float) -> int:
    """ceil(fs / 4 Hz): no two peaks closer than the 240 bpm band edge allows."""
    return int(math.ceil(fs / 4.0))


def diagonal_profile(m, fs: float) -> Wave:
    """Mean of every diagonal group g_a = {m[i, j] : |i - j| = a}, a = 0..n-1.

    The caller supplies the frame rate the matrix rows were sampled at.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("diagonal_profile expects a square matrix")
    n = m.shape[0]
    if n < 8:
        raise ValueError("matrix too small: need n >= 8")
    profile = np.empty(n)
    for a in range(n):
        upper = np.diagonal(m, offset=a)
        lower = np.diagonal(m, offset=-a)
        profile[a] = (upper.sum() + lower.sum()) / (upper.size + lower.size)
    return Wave(profile, fs)


def detect_peaks(w, min_dist: int) -> np.ndarray:
    """Strict interior local maxima above the signal mean, min_dist apart.

    Suppression is greedy from the largest peak down; ties break toward the
    earlier index.  May return an empty array.
    """
    if min_dist < 1:
        raise ValueError("min_dist must be >= 1")
    x = np.asarray(getattr(w, "samples", w), dtype=float)
    if x.ndim != 1:
        raise ValueError("detect_peaks expects a 1-D signal")
    if x.size < 3:
        return np.array([], dtype=int)
    mean = x.mean()
    interior = np.arange(1, x.size - 1)
    is_peak = (x[1:-1] > x[:-2]) & (x[1:-1] > x[2:]) & (x[1:-1] > mean)
    candidates = interior[is_peak]
    order = sorted(candidates, key=lambda i: (-x[i], i))
    kept: list[int] = []
    for i in order:
        if all(abs(i - j) >= min_dist for j in kept):
            kept.append(i)
    return np.array(sorted(kept), dtype=int)


def _bpm_from_filtered(filtered: Wave) -> float:
    peaks = detect_peaks(filtered, min_peak_distance(filtered.fs))
    if peaks.size < 2:
        raise EstimationError("fewer than 2 peaks detected: rate unestimable")
    return 60.0 * filtered.fs / float(np.mean(np.diff(peaks)))


def estimate_hr(m, fs: float) -> float:
    """Beats per minute from a similarity matrix at the given frame rate."""
    m = np.asarray(m, dtype=float)
    if m.shape[0] / fs < 3.0:
        raise ValueError("matrix spans less than 3 s: too short to estimate a rate")
    profile = diagonal_profile(m, fs)
    if np.ptp(profile.samples) < _FLAT_PTP:
        # constant profile (e.g. an all-ones matrix): re-filtering would only
        # amplify rounding noise, so fail the same way an empty peak set does
        raise EstimationError("similarity profile is flat: fewer than 2 peaks detected")
    return _bpm_from_filtered(cwt_filter(butter_bandpass(profile)))


def estimate_hr_wave(w: Wave) -> float:
    """Beats per minute straight from a wave, via the same filter chain."""
    if w.duration < 5.0:
        raise ValueError("wave shorter than 5 s: too short to estimate a rate")
    banded = butter_bandpass(w)
    # a wave with no pass-band content leaves only rounding noise here, and
    # the narrow-banding stage would amplify that into arbitrary peaks; the
    # threshold is relative to the input so amplitude stays meaningless
    span = np.ptp(w.samples)
    if span == 0.0 or np.ptp(banded.samples) <= 1e-9 * span:
        raise EstimationError("wave is flat in the pass band: fewer than 2 peaks detected")
    return _bpm_from_filtered(cwt_filter(banded))


class HrMetrics(NamedTuple):
    mae: float
    std: float
    rmse: float


def metrics(pred, truth) -> HrMetrics:
    """MAE, population std, and RMSE of the per-sample errors pred - truth."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError("pred and truth must be 1-D with equal lengths")
    if pred.size == 0:
        raise ValueError("metrics need at least one sample")
    err = pred - truth
    return HrMetrics(
        mae=float(np.mean(np.abs(err))),
        std=float(np.std(err)),
        rmse=float(np.sqrt(np.mean(err**2))),
    )
