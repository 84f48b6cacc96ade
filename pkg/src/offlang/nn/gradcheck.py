"""Central finite-difference verification of analytic gradients.

Checks run in double precision. The error measure is
|analytic - numeric| / max(|analytic|, |numeric|, floor); the absolute
floor keeps finite-difference noise on near-zero entries from inflating
the relative error.
"""
from __future__ import annotations

import numpy as np

from .layers import ModelGraph
from .losses import bce_loss, bce_loss_grad

DEFAULT_STEP = 1e-5
ERROR_FLOOR = 1e-4


def numeric_gradient(fn, array: np.ndarray, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central finite differences of ``fn()`` with respect to ``array`` in place."""
    grad = np.zeros_like(array, dtype=np.float64)
    it = np.nditer(array, flags=["multi_index"])
    while not it.finished:
        ix = it.multi_index
        original = array[ix]
        array[ix] = original + step
        plus = fn()
        array[ix] = original - step
        minus = fn()
        array[ix] = original
        grad[ix] = (plus - minus) / (2.0 * step)
        it.iternext()
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = ERROR_FLOOR):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def check_layer_gradients(layer, x, lengths=None, rng_seed=0, step=DEFAULT_STEP):
    """Max relative error across the layer's parameters and its input.

    The scalar objective is a fixed random projection of the layer output;
    stochastic layers are re-seeded per evaluation so the objective stays a
    deterministic function of the perturbed values.
    """
    x = np.asarray(x)
    if np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    proj_rng = np.random.default_rng(12345)

    def run():
        out, _ = layer.forward(x, lengths, train=True, rng=np.random.default_rng(rng_seed))
        return out

    probe = np.asarray(proj_rng.normal(size=run().shape))

    def objective():
        return float(np.sum(run() * probe))

    out, _ = layer.forward(x, lengths, train=True, rng=np.random.default_rng(rng_seed))
    for p in layer.parameters():
        p.zero_grad()
    dx = layer.backward(probe.astype(out.dtype))

    worst = 0.0
    for p in layer.parameters():
        numeric = numeric_gradient(objective, p.value, step)
        worst = max(worst, max_relative_error(p.grad, numeric))
    if dx is not None:
        numeric = numeric_gradient(objective, x, step)
        worst = max(worst, max_relative_error(dx, numeric))
    return worst


def check_model_gradients(model: ModelGraph, X, lengths, y, rng_seed=0, step=DEFAULT_STEP):
    """Max relative error of d(mean BCE)/d(theta) across all parameters."""
    X = np.asarray(X)
    y = np.asarray(y, dtype=np.float64)

    def objective():
        probs = model.forward(X, lengths, train=True, rng=np.random.default_rng(rng_seed))
        return bce_loss(probs, y)

    model.zero_grad()
    probs = model.forward(X, lengths, train=True, rng=np.random.default_rng(rng_seed))
    _, dprobs = bce_loss_grad(probs, y.astype(probs.dtype))
    model.backward(dprobs)

    worst = 0.0
    for p in model.parameters():
        numeric = numeric_gradient(objective, p.value, step)
        worst = max(worst, max_relative_error(p.grad, numeric))
    return worst
