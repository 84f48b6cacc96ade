"""Binary cross-entropy on probability outputs."""
from __future__ import annotations

import numpy as np

CLIP_EPS = 1e-7


def bce_loss(pred, target, eps: float = CLIP_EPS) -> float:
    """Mean of -[y log p + (1-y) log(1-p)] with p clipped to [eps, 1-eps]."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} != target shape {target.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    return float(np.mean(-(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))))


def bce_loss_grad(pred, target, eps: float = CLIP_EPS):
    """Loss plus its gradient with respect to the predictions.

    Where the clip is active the local derivative is zero, matching what a
    finite difference of the clipped loss sees.
    """
    pred = np.asarray(pred)
    target = np.asarray(target, dtype=pred.dtype)
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} != target shape {target.shape}")
    p = np.clip(pred, eps, 1.0 - eps)
    loss = float(np.mean(-(target * np.log(p) + (1.0 - target) * np.log(1.0 - p))))
    grad = (p - target) / (p * (1.0 - p)) / pred.size
    grad = np.where(p == pred, grad, 0.0).astype(pred.dtype)
    return loss, grad
