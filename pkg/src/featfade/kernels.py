"""Numba inner loops for scoring and per-example SGD.

The slot layout is a fixed-width row per example: bucket index, value, and a
presence flag per slot. Accumulation always runs in slot order so the batch
path and the single-example path produce bit-identical sums.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# float64 rounds sigmoid to exactly 0 or 1 beyond |z| ~ 36.7; clamping the
# score there keeps every prediction strictly inside (0, 1)
_SCORE_CLAMP = 36.0


@njit(cache=True)
def _sigmoid(z: float) -> float:
    if z > _SCORE_CLAMP:
        z = _SCORE_CLAMP
    elif z < -_SCORE_CLAMP:
        z = -_SCORE_CLAMP
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def predict_rows(weights, bias, buckets, values, present):
    """Sigmoid scores for each row; weights untouched."""
    n = buckets.shape[0]
    s = buckets.shape[1]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        z = bias
        for j in range(s):
            if present[i, j]:
                z += weights[buckets[i, j]] * values[i, j]
        out[i] = _sigmoid(z)
    return out


@njit(cache=True)
def sgd_rows(weights, bias, lr, buckets, values, present, labels):
    """One sequential SGD pass over the rows in order; returns the new bias.

    Per example: p = sigmoid(score); the bias and every present bucket move
    by lr * (y - p) * magnitude. Mutates `weights` in place.
    """
    n = buckets.shape[0]
    s = buckets.shape[1]
    for i in range(n):
        z = bias
        for j in range(s):
            if present[i, j]:
                z += weights[buckets[i, j]] * values[i, j]
        p = _sigmoid(z)
        g = lr * (labels[i] - p)
        bias += g
        for j in range(s):
            if present[i, j]:
                weights[buckets[i, j]] += g * values[i, j]
    return bias
