"""byhe: delay-invariant phase similarity maps for pulse waves.

Converts physiological label waves into phase self-similarity matrices that
are invariant to unknown acquisition delays, provides the matching
cosine-similarity network head with exact gradients and its training
objective, extracts heart rate from similarity matrices, and ships the
synthetic-signal oracles everything is verified against.
"""

from .core import ByheError, EstimationError, FormatError, Wave
from .filters import (DEFAULT_CWT_FREQS, MORLET_OMEGA0, AnalyticWave, BandpassSpec,
                      WaveletSpectrum, analytic_signal, butter_bandpass, cwt_filter,
                      cwt_forward, cwt_inverse, dominant_frequency, emphasize,
                      spectral_flatness)
from .head import (EPS, HeadConfig, Projection, cosine_matrix, head_backward,
                   head_forward, project, slice_windows)
from .hr import (HrMetrics, detect_peaks, diagonal_profile, estimate_hr,
                 estimate_hr_wave, metrics, min_peak_distance)
from .io import read_matrix, read_wave, resample, write_matrix, write_pgm, write_wave
from .losses import (LossBreakdown, LossWeights, mse_loss, pearson_loss, reg_loss,
                     total_loss)
from .phase import (PhaseSeries, check_sim_matrix, default_center_offset,
                    instantaneous_phase, label_matrix, make_label)
from .synth import (FEATURE_FS, SynthSpec, oracle_label_matrix, synth_bvp,
                    synth_ecg_like, synth_features)
from .train import (GradCheckReport, SampleSpec, TrainConfig, TrainReport,
                    baseline_wave_mse, grad_check, train)

__version__ = "0.1.0"

__all__ = [
    "ByheError", "EstimationError", "FormatError", "Wave",
    "DEFAULT_CWT_FREQS", "MORLET_OMEGA0", "AnalyticWave", "BandpassSpec",
    "WaveletSpectrum", "analytic_signal", "butter_bandpass", "cwt_filter",
    "cwt_forward", "cwt_inverse", "dominant_frequency", "emphasize",
    "spectral_flatness",
    "EPS", "HeadConfig", "Projection", "cosine_matrix", "head_backward",
    "head_forward", "project", "slice_windows",
    "HrMetrics", "detect_peaks", "diagonal_profile", "estimate_hr",
    "estimate_hr_wave", "metrics", "min_peak_distance",
    "read_matrix", "read_wave", "resample", "write_matrix", "write_pgm", "write_wave",
    "LossBreakdown", "LossWeights", "mse_loss", "pearson_loss", "reg_loss", "total_loss",
    "PhaseSeries", "check_sim_matrix", "default_center_offset",
    "instantaneous_phase", "label_matrix", "make_label",
    "FEATURE_FS", "SynthSpec", "oracle_label_matrix", "synth_bvp",
    "synth_ecg_like", "synth_features",
    "GradCheckReport", "SampleSpec", "TrainConfig", "TrainReport",
    "baseline_wave_mse", "grad_check", "train",
    "__version__",
]
