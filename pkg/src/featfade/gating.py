"""Deterministic per-request feature gating.

A feature is kept for a request iff u(feature, request_id) < coverage, where
u is a unit-interval hash: FNV-1a 64 over the UTF-8 feature name, XOR with
the request id, then the SplitMix64 finalizer, divided by 2^64. The
construction is nested: lowering coverage only ever removes requests from the
keep set, never adds, so a fade-out is strictly incremental per request and a
rollback restores exactly the prior behavior.

The scalar and vectorized paths compute identical bits; golden vectors for
the hash ship in the test suite.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from .domain import FeatureId

FNV_OFFSET_BASIS = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1
_TWO64 = float(2**64)

_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MULT1 = 0xBF58476D1CE4E5B9
_SM_MULT2 = 0x94D049BB133111EB


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def feature_hash(feature: Union[FeatureId, str]) -> int:
    """The per-feature hash seed (FNV-1a of the UTF-8 name)."""
    name = feature.name if isinstance(feature, FeatureId) else feature
    return fnv1a64(name.encode("utf-8"))


def _splitmix64(x: int) -> int:
    x = (x + _SM_GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _SM_MULT1) & _MASK64
    x = ((x ^ (x >> 27)) * _SM_MULT2) & _MASK64
    return x ^ (x >> 31)


def unit_interval_hash(feature: Union[FeatureId, str], request_id: int) -> float:
    """u(feature, request_id) in [0, 1)."""
    return _splitmix64(feature_hash(feature) ^ request_id) / _TWO64


def gate_decision(
    feature: Union[FeatureId, str], request_id: int, coverage: float
) -> bool:
    """True iff the feature is kept for this request at this coverage.

    Strict less-than: coverage 0.0 keeps nothing, coverage 1.0 keeps
    everything (u is always < 1).
    """
    if not (0.0 <= coverage <= 1.0):
        raise ValueError(f"coverage must be in [0, 1], got {coverage!r}")
    return unit_interval_hash(feature, request_id) < coverage


def unit_interval_hash_array(
    feature: Union[FeatureId, str], request_ids: np.ndarray
) -> np.ndarray:
    """Vectorized u(feature, request_id); bit-identical to the scalar path."""
    h0 = np.uint64(feature_hash(feature))
    x = request_ids.astype(np.uint64, copy=True)
    x ^= h0
    # SplitMix64 finalizer on uint64 with wraparound semantics
    x += np.uint64(_SM_GAMMA)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_SM_MULT1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_SM_MULT2)
    x ^= x >> np.uint64(31)
    return x.astype(np.float64) / _TWO64


def gate_mask(
    feature: Union[FeatureId, str], request_ids: np.ndarray, coverage: float
) -> np.ndarray:
    """Vectorized gate_decision over an array of request ids."""
    if not (0.0 <= coverage <= 1.0):
        raise ValueError(f"coverage must be in [0, 1], got {coverage!r}")
    return unit_interval_hash_array(feature, request_ids) < coverage
