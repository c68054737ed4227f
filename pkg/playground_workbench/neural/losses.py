"""
Neural Core: Losses

Each loss returns (mean loss, gradient w.r.t. its first argument).
"""

from typing import Optional, Tuple

import numpy as np

_EPS = 1e-7


def binary_cross_entropy(prob: np.ndarray, target: np.ndarray,
                         weights: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """BCE on probabilities; the gradient is safe where the sigmoid saturates."""
    prob = np.asarray(prob)
    target = np.asarray(target, dtype=prob.dtype)
    clipped = np.clip(prob, _EPS, 1.0 - _EPS)
    losses = -(target * np.log(clipped) + (1.0 - target) * np.log(1.0 - clipped))
    grad = (clipped - target) / (clipped * (1.0 - clipped))
    if weights is not None:
        losses = losses * weights
        grad = grad * weights
    count = max(prob.size, 1)
    return float(losses.sum() / count), (grad / count).astype(prob.dtype)


def mean_squared_error(pred: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    pred = np.asarray(pred)
    diff = pred - np.asarray(target, dtype=pred.dtype)
    count = max(pred.size, 1)
    return float(np.sum(diff * diff) / count), (2.0 * diff / count).astype(pred.dtype)
