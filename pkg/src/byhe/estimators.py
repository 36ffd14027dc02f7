"""Scikit-learn style wrappers around the functional core.

Two estimators cover the package's public workflow:

* SimilarityMapTransformer: stateless wave -> similarity-matrix transform.
* HeadHeartRateRegressor: fits the projection head on feature sequences
  labeled with beat rates, then predicts rates for new sequences.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import EstimationError, Wave
from .head import head_forward
from .hr import estimate_hr
from .losses import LossWeights
from .phase import make_label
from .synth import FEATURE_FS, oracle_label_matrix
from .train import _fit_projection


class SimilarityMapTransformer(BaseEstimator, TransformerMixin):
    """Transform raw waves into phase self-similarity matrices.

    Parameters
    ----------
    kind : str, default="bvp"
        Source waveform family, "bvp" or "ecg".
    n_out : int, default=64
        Side length of each output matrix.
    center_offset : int or None, default=None
        First sample index used; None picks the first sliding-window center.
    fs : float, default=30.0
        Sampling rate assumed for bare array rows; Wave inputs carry their own.
    """

    def __init__(self, kind: str = "bvp", n_out: int = 64,
                 center_offset: int | None = None, fs: float = 30.0):
        self.kind = kind
        self.n_out = n_out
        self.center_offset = center_offset
        self.fs = fs

    def fit(self, X, y=None):
        """Stateless transform; fit only validates parameters."""
        if self.n_out < 2:
            raise ValueError("n_out must be >= 2")
        self._as_waves(X)
        self.fitted_ = True
        return self

    def _as_waves(self, X):
        if isinstance(X, Wave):
            return [X]
        waves = []
        for row in X:
            waves.append(row if isinstance(row, Wave) else Wave(np.asarray(row, dtype=float), self.fs))
        if not waves:
            raise ValueError("X must contain at least one wave")
        return waves

    def transform(self, X) -> np.ndarray:
        """Return an array of shape (n_waves, n_out, n_out)."""
        waves = self._as_waves(X)
        return np.stack([make_label(w, self.kind, self.n_out, self.center_offset) for w in waves])


class HeadHeartRateRegressor(BaseEstimator, RegressorMixin):
    """Projection head trained on feature sequences, predicting beats per minute.

    Each training sequence is paired with the exact cosine matrix of its
    labeled rate; any latent delay in the features never enters the label.

    Parameters
    ----------
    window_len : int, default=11
        Sliding-window length of the head.
    out_dim : int, default=88
        Projection output dimension.
    activation : str, default="tanh"
    alpha, beta, gamma : float
        Loss term weights (element fit, row correlation, diagonal uniformity).
    epochs : int, default=200
    learning_rate : float, default=5e-4
    batch_size : int, default=0
        0 runs full-batch steps.
    random_state : int, default=0
        Seed for weight initialization.

    Attributes
    ----------
    projection_ : Projection
        Trained head weights.
    stats_ : list of EpochStats
        Per-epoch loss breakdowns (entry 0 is the pre-training evaluation).
    halvings_ : list of int
        Epochs at which the learning rate was halved.
    """

    def __init__(self, window_len: int = 11, out_dim: int = 88, activation: str = "tanh",
                 alpha: float = 1.0, beta: float = 0.8, gamma: float = 0.1,
                 epochs: int = 200, learning_rate: float = 5e-4, batch_size: int = 0,
                 random_state: int = 0):
        self.window_len = window_len
        self.out_dim = out_dim
        self.activation = activation
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.random_state = random_state

    def _sequences(self, X):
        seqs = [np.asarray(item, dtype=float) for item in X]
        if not seqs:
            raise ValueError("X must contain at least one sequence")
        dims = {s.shape[1] for s in seqs if s.ndim == 2}
        if len(dims) != 1 or any(s.ndim != 2 for s in seqs):
            raise ValueError("every sequence must be 2-D (frames, dims) with a shared dims")
        return seqs

    def fit(self, X, y):
        """Fit the projection on (sequence, bpm) pairs.

        X is an iterable of (frames, dims) arrays, y the rates in bpm.
        """
        seqs = self._sequences(X)
        y = np.asarray(y, dtype=float)
        if y.shape != (len(seqs),):
            raise ValueError("y must hold one bpm value per sequence")
        pairs = []
        for seq, bpm in zip(seqs, y):
            n = seq.shape[0] - self.window_len + 1
            if n < 3:
                raise ValueError("sequences must span at least window_len + 2 frames")
            pairs.append((seq, oracle_label_matrix(bpm, FEATURE_FS, n)))
        weights = LossWeights(alpha=self.alpha, beta=self.beta, gamma=self.gamma)
        proj, head_cfg, stats, halvings, diverged = _fit_projection(
            pairs, weights=weights, epochs=self.epochs, learning_rate=self.learning_rate,
            batch_size=self.batch_size, window_len=self.window_len, out_dim=self.out_dim,
            activation=self.activation, seed=self.random_state)
        self.projection_ = proj
        self.head_config_ = head_cfg
        self.stats_ = stats
        self.halvings_ = halvings
        self.diverged_ = diverged
        self.n_features_in_ = seqs[0].shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Predicted bpm per sequence; unestimable sequences yield 0.0 with a warning."""
        check_is_fitted(self, "projection_")
        seqs = self._sequences(X)
        out = np.zeros(len(seqs))
        for k, seq in enumerate(seqs):
            matrix = head_forward(seq, self.projection_, self.head_config_)
            try:
                out[k] = estimate_hr(matrix, FEATURE_FS)
            except EstimationError as exc:
                warnings.warn(f"sequence {k}: {exc}; predicting 0.0", RuntimeWarning)
                out[k] = 0.0
        return out
