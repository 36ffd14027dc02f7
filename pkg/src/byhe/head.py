"""Similarity head: sliding windows, projection, pairwise cosine matrix.

Forward turns a T x D feature sequence into an N x N cosine-similarity
matrix (N = T - L + 1).  Backward implements the exact chain rule through
the cosine quotient, the activation, and the linear map; it is verified
against central finite differences in the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .io import _FMT, _open_text

#: norm guard for cosine normalization; vectors at or below this norm are
#: treated as dead: their similarity rows are 0 (including the diagonal)
EPS = 1e-8

ACTIVATIONS = ("tanh", "identity")


@dataclass(frozen=True)
class HeadConfig:
    """Sliding-window geometry.  Stride is fixed at 1 by design."""

    window_len: int = 11
    stride: int = 1
    conv_margin: int = 0

    def __post_init__(self):
        if self.window_len < 1:
            raise ValueError("window_len must be >= 1")
        if self.stride != 1:
            raise ValueError("stride is fixed at 1")
        if self.conv_margin < 0:
            raise ValueError("conv_margin must be >= 0")


@dataclass(eq=False)
class Projection:
    """Linear map plus activation applied to each flattened window.

    weights has shape (in_dim, out_dim) with in_dim = window_len * D; bias is
    optional but present by default.  The default activation is tanh: an
    odd-symmetric squashing keeps cosine similarity sign-faithful.
    """

    weights: np.ndarray
    bias: np.ndarray | None = None
    activation: str = "tanh"

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 2:
            raise ValueError("weights must be 2-D (in_dim, out_dim)")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        self.weights = weights
        if self.bias is not None:
            bias = np.asarray(self.bias, dtype=float)
            if bias.shape != (weights.shape[1],):
                raise ValueError("bias must have shape (out_dim,)")
            if not np.all(np.isfinite(bias)):
                raise ValueError("bias must be finite")
            self.bias = bias
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def init(cls, in_dim: int, out_dim: int = 88, seed: int = 0,
             activation: str = "tanh", bias: bool = True) -> "Projection":
        """Uniform(-1/sqrt(in_dim), 1/sqrt(in_dim)) weights and bias."""
        rng = np.random.default_rng(seed)
        bound = 1.0 / np.sqrt(in_dim)
        weights = rng.uniform(-bound, bound, size=(in_dim, out_dim))
        b = rng.uniform(-bound, bound, size=out_dim) if bias else None
        return cls(weights, b, activation)

    def save(self, sink) -> None:
        """CSV persistence: dims header, weight rows, then the bias row."""
        with _open_text(sink, "w") as handle:
            handle.write(f"# in_dim={self.in_dim} out_dim={self.out_dim} "
                         f"activation={self.activation} bias={int(self.bias is not None)}\n")
            for row in self.weights:
                handle.write(",".join(_FMT % v for v in row) + "\n")
            if self.bias is not None:
                handle.write(",".join(_FMT % v for v in self.bias) + "\n")

    @classmethod
    def load(cls, source) -> "Projection":
        from .core import FormatError

        with _open_text(source, "r") as handle:
            header = handle.readline().strip()
            if not header.startswith("#"):
                raise FormatError("projection file must start with a dims header")
            fields = dict(item.split("=", 1) for item in header.lstrip("#").split())
            try:
                in_dim = int(fields["in_dim"])
                out_dim = int(fields["out_dim"])
                activation = fields["activation"]
                has_bias = bool(int(fields["bias"]))
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad projection header: {header!r}") from exc
            rows = [line.strip() for line in handle if line.strip()]
        expected = in_dim + (1 if has_bias else 0)
        if len(rows) != expected:
            raise FormatError(f"expected {expected} data rows, found {len(rows)}")
        try:
            weights = np.array([[float(v) for v in row.split(",")] for row in rows[:in_dim]])
            bias = np.array([float(v) for v in rows[in_dim].split(",")]) if has_bias else None
        except ValueError as exc:
            raise FormatError("non-numeric value in projection file") from exc
        if weights.shape != (in_dim, out_dim):
            raise FormatError("projection weight block does not match header dims")
        return cls(weights, bias, activation)


def slice_windows(features, cfg: HeadConfig | None = None) -> np.ndarray:
    """All length-L windows at stride 1, each flattened row-major: shape (N, L*D)."""
    cfg = cfg or HeadConfig()
    data = np.asarray(features, dtype=float)
    if data.ndim != 2:
        raise ValueError("features must be a 2-D (T, D) array")
    t, d = data.shape
    lwin = cfg.window_len
    if t < lwin:
        raise ValueError(f"need T >= window_len, got T={t} < L={lwin}")
    windows = np.lib.stride_tricks.sliding_window_view(data, (lwin, d))
    return windows.reshape(t - lwin + 1, lwin * d).copy()


def _activate(z: np.ndarray, name: str) -> np.ndarray:
    return np.tanh(z) if name == "tanh" else z


def project(slices, p: Projection) -> np.ndarray:
    """Apply the projection to each flattened window: act(W^T s + b)."""
    slices = np.asarray(slices, dtype=float)
    if slices.ndim != 2 or slices.shape[1] != p.in_dim:
        raise ValueError(f"slices must be (N, {p.in_dim})")
    z = slices @ p.weights
    if p.bias is not None:
        z = z + p.bias
    return _activate(z, p.activation)


def cosine_matrix(vectors) -> np.ndarray:
    """Pairwise cosine similarities with an EPS norm guard.

    Zero-norm vectors contribute 0 rows (diagonal included) and raise a
    RuntimeWarning rather than an error, so training can step through dead
    features.
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2:
        raise ValueError("need at least 2 vectors")
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms <= EPS):
        warnings.warn("zero-norm vectors: their similarity rows are set to 0", RuntimeWarning)
    guarded = np.maximum(norms, EPS)
    return (v @ v.T) / np.outer(guarded, guarded)


def head_forward(features, p: Projection, cfg: HeadConfig | None = None) -> np.ndarray:
    """cosine_matrix(project(slice_windows(features)))."""
    matrix, _ = _forward_cached(features, p, cfg)
    return matrix


def _forward_cached(features, p, cfg):
    slices = slice_windows(features, cfg)
    vectors = project(slices, p)
    return cosine_matrix(vectors), (slices, vectors)


def _backward_from_cache(upstream, cache, p: Projection):
    """Exact gradients of sum(upstream * C) with respect to weights and bias.

    With n_i = max(||v_i||, EPS) and C = V V^T / (n n^T), the chain rule for
    an arbitrary upstream U gives, via M = U + U^T (the diagonal's factor 2
    emerges from M_ii = 2 U_ii):

        dL/dV = (M / (n n^T)) V - diag(rowsum(M * C) / n^2) V

    where the second (normalization) term only applies to rows whose norm
    actually exceeds EPS: guarded rows have constant n, so their norm does
    not vary with V.
    """
    slices, vectors = cache
    upstream = np.asarray(upstream, dtype=float)
    n = upstream.shape[0]
    if upstream.shape != (n, n) or n != vectors.shape[0]:
        raise ValueError("upstream gradient must be (N, N) matching the head output")
    norms = np.linalg.norm(vectors, axis=1)
    guarded = np.maximum(norms, EPS)
    active = (norms > EPS).astype(float)
    cos = (vectors @ vectors.T) / np.outer(guarded, guarded)
    m = upstream + upstream.T
    grad_v = (m / np.outer(guarded, guarded)) @ vectors
    grad_v -= (active * (m * cos).sum(axis=1) / guarded**2)[:, None] * vectors
    if p.activation == "tanh":
        grad_z = grad_v * (1.0 - vectors**2)
    else:
        grad_z = grad_v
    grad_w = slices.T @ grad_z
    grad_b = grad_z.sum(axis=0) if p.bias is not None else None
    return grad_w, grad_b, grad_z


def head_backward(features, p: Projection, cfg: HeadConfig | None, upstream,
                  return_input_grad: bool = False):
    """Gradients of sum(upstream * head_forward(features)) w.r.t. W, b (and input).

    Returns (dW, db) by default; db is None for bias-free projections.  With
    return_input_grad=True a (T, D) feature gradient is appended, needed only
    when a trainable front end feeds this head.
    """
    cfg = cfg or HeadConfig()
    _, cache = _forward_cached(features, p, cfg)
    grad_w, grad_b, grad_z = _backward_from_cache(upstream, cache, p)
    if not return_input_grad:
        return grad_w, grad_b
    data = np.asarray(features, dtype=float)
    t, d = data.shape
    lwin = cfg.window_len
    grad_slices = grad_z @ p.weights.T
    grad_f = np.zeros((t, d))
    for i in range(grad_slices.shape[0]):
        grad_f[i : i + lwin] += grad_slices[i].reshape(lwin, d)
    return grad_w, grad_b, grad_f
