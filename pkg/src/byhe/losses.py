"""Training objective over (predicted, target) similarity matrices.

Three terms, each returning (value, gradient w.r.t. the prediction):

* mse_loss: mean squared error over all n^2 elements.
* pearson_loss: mean over rows of (1 - correlation); correlation of a
  degenerate (near-constant) row is defined as 0, contributing 1 with a zero
  gradient, so the loss stays finite through collapsed predictions.
* reg_loss: mean over diagonal groups of the population standard deviation
  inside each group, pushing predictions toward constant diagonals.

All gradients are exact and finite everywhere; the guards below pin down
behavior at the degenerate points where the raw formulas would divide by
zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: a similarity row whose variance falls below this is treated as constant
ROW_VAR_EPS = 1e-8

#: added inside the square root of each group's standard deviation
STD_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Term weights; defaults are the tuned operating point."""

    alpha: float = 1.0
    beta: float = 0.8
    gamma: float = 0.1

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("loss weights must be >= 0")


@dataclass(eq=False)
class LossBreakdown:
    mse: float
    pearson: float
    reg: float
    total: float
    grad: np.ndarray


def _check_pair(rhat, r):
    rhat = np.asarray(rhat, dtype=float)
    r = np.asarray(r, dtype=float)
    if rhat.ndim != 2 or rhat.shape[0] != rhat.shape[1]:
        raise ValueError("prediction must be a square matrix")
    if rhat.shape != r.shape:
        raise ValueError(f"shape mismatch: {rhat.shape} vs {r.shape}")
    return rhat, r


def mse_loss(rhat, r):
    """Mean of (rhat - r)^2 over all n^2 elements; grad = 2(rhat - r)/n^2."""
    rhat, r = _check_pair(rhat, r)
    diff = rhat - r
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def pearson_loss(rhat, r):
    """Mean over rows of (1 - Pearson correlation) between prediction and target rows."""
    rhat, r = _check_pair(rhat, r)
    n = rhat.shape[0]
    if n < 3:
        raise ValueError("pearson_loss needs at least 3 rows")
    xc = rhat - rhat.mean(axis=1, keepdims=True)
    yc = r - r.mean(axis=1, keepdims=True)
    sxx = np.sum(xc**2, axis=1)
    syy = np.sum(yc**2, axis=1)
    sxy = np.sum(xc * yc, axis=1)
    ok = (sxx / n >= ROW_VAR_EPS) & (syy / n >= ROW_VAR_EPS)
    rho = np.zeros(n)
    grad = np.zeros_like(rhat)
    if np.any(ok):
        denom = np.sqrt(sxx[ok] * syy[ok])
        rho[ok] = sxy[ok] / denom
        # d(1 - rho)/d rhat_row = -(yc - (sxy/sxx) xc) / sqrt(sxx syy)
        grad[ok] = -(yc[ok] - (sxy[ok] / sxx[ok])[:, None] * xc[ok]) / denom[:, None]
    return float(np.mean(1.0 - rho)), grad / n


def _group_indices(n: int, a: int):
    i = np.arange(n - a)
    if a == 0:
        return i, i
    return np.concatenate([i, i + a]), np.concatenate([i + a, i])


def reg_loss(rhat):
    """Mean over diagonal groups g_a = {r[i, j] : |i - j| = a} of std(g_a).

    Population std with STD_EPS inside the root; an exactly constant group
    contributes exactly 0 with a zero gradient (an all-constant matrix,
    diagonally constant targets, and single-element groups all sit at that
    stationary value).  Constancy is tested on the elements themselves, not
    on the variance: the mean of identical floats can round a last-ulp away
    from them, and the eps inside the root would blow that phantom variance
    up to 1e-6 per group.
    """
    rhat = np.asarray(rhat, dtype=float)
    if rhat.ndim != 2 or rhat.shape[0] != rhat.shape[1]:
        raise ValueError("reg_loss expects a square matrix")
    n = rhat.shape[0]
    if n < 2:
        raise ValueError("reg_loss needs n >= 2")
    value = 0.0
    grad = np.zeros_like(rhat)
    for a in range(n):
        ii, jj = _group_indices(n, a)
        g = rhat[ii, jj]
        if np.ptp(g) != 0.0:
            mu = g.mean()
            var = np.mean((g - mu) ** 2)
            den = np.sqrt(var + STD_EPS)
            value += den
            grad[ii, jj] += (g - mu) / (g.size * den)
    return value / n, grad / n


def total_loss(rhat, r, weights: LossWeights | None = None) -> LossBreakdown:
    """Weighted sum of the three terms with the combined exact gradient."""
    weights = weights or LossWeights()
    v_mse, g_mse = mse_loss(rhat, r)
    v_pear, g_pear = pearson_loss(rhat, r)
    v_reg, g_reg = reg_loss(rhat)
    total = weights.alpha * v_mse + weights.beta * v_pear + weights.gamma * v_reg
    grad = weights.alpha * g_mse + weights.beta * g_pear + weights.gamma * g_reg
    return LossBreakdown(mse=v_mse, pearson=v_pear, reg=v_reg, total=float(total), grad=grad)
