"""Shared value types and exceptions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ByheError(Exception):
    """Base class for errors raised by this package."""


class FormatError(ByheError):
    """Malformed input file or stream."""


class EstimationError(ByheError):
    """A quantity could not be estimated from the given input."""


@dataclass(frozen=True, eq=False)
class Wave:
    """Uniformly sampled real-valued 1-D signal.

    samples carry arbitrary amplitude units; fs is the sampling rate in Hz.
    Samples must be non-empty and finite, fs must be positive.
    """

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("Wave.samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Wave.samples must contain only finite values")
        if not float(self.fs) > 0:
            raise ValueError("Wave.fs must be > 0")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Signal length in seconds."""
        return self.samples.size / self.fs
