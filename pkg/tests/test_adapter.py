"""Serving adapter: pass-through, drops, scaling, and logged-equals-served."""

from __future__ import annotations

import time

import pytest

from featfade.adapter import CoverageSnapshot, apply_fading
from featfade.domain import Example, ScheduleMode
from featfade.errors import InvalidScheduleError
from featfade.gating import gate_decision


def example(rid=42, day=3):
    return Example(
        request_id=rid,
        features={
            "sparse_00": 17,
            "dense_0": 2.0,
            "embed_0": (0.5, -1.5, 2.25, 0.0, 1.0, -0.125, 3.5, 0.75),
        },
        label=1,
        day=day,
    )


def snapshot(entries, version=1):
    return CoverageSnapshot(
        entries={
            name: (ScheduleMode(mode), frac) for name, (mode, frac) in entries.items()
        },
        version=version,
    )


class TestApplyFading:
    def test_empty_snapshot_is_identity(self):
        ex = example()
        logged = apply_fading(ex, CoverageSnapshot())
        assert logged.features == ex.features
        assert logged.request_id == ex.request_id
        assert logged.label == ex.label
        assert logged.day == ex.day
        assert logged.effective_coverage_snapshot == {}

    def test_zero_coverage_drops_feature_for_all_requests(self):
        snap = snapshot({"sparse_00": ("coverage", 0.0)})
        for rid in range(500):
            logged = apply_fading(example(rid=rid), snap)
            assert "sparse_00" not in logged.features
            assert "dense_0" in logged.features

    def test_distribution_mode_scales_dense(self):
        snap = snapshot({"dense_0": ("distribution", 0.5)})
        logged = apply_fading(example(), snap)
        assert logged.features["dense_0"] == 1.0

    def test_distribution_mode_scales_embedding_componentwise(self):
        snap = snapshot({"embed_0": ("distribution", 0.25)})
        logged = apply_fading(example(), snap)
        assert logged.features["embed_0"] == (
            0.125, -0.375, 0.5625, 0.0, 0.25, -0.03125, 0.875, 0.1875,
        )

    def test_distribution_mode_rejects_sparse_id(self):
        snap = snapshot({"sparse_00": ("distribution", 0.5)})
        with pytest.raises(InvalidScheduleError):
            apply_fading(example(), snap)

    def test_untouched_features_bit_identical(self):
        snap = snapshot({"sparse_00": ("coverage", 0.7)})
        ex = example()
        logged = apply_fading(ex, snap)
        assert logged.features["dense_0"] is ex.features["dense_0"]
        assert logged.features["embed_0"] is ex.features["embed_0"]

    def test_gate_agrees_with_gate_decision(self):
        snap = snapshot({"sparse_00": ("coverage", 0.37)})
        for rid in range(300):
            logged = apply_fading(example(rid=rid), snap)
            kept = "sparse_00" in logged.features
            assert kept == gate_decision("sparse_00", rid, 0.37)

    def test_snapshot_recorded_on_logged_example(self):
        snap = snapshot(
            {"sparse_00": ("coverage", 0.4), "dense_0": ("distribution", 0.9)}
        )
        logged = apply_fading(example(), snap)
        assert logged.effective_coverage_snapshot == {
            "sparse_00": 0.4,
            "dense_0": 0.9,
        }

    def test_pure_function_determinism(self):
        snap = snapshot({"sparse_00": ("coverage", 0.5)})
        ex = example(rid=123456)
        assert apply_fading(ex, snap) == apply_fading(ex, snap)


def test_adapter_overhead_smoke():
    # latency sanity only: 1000 applications stay well under a second
    snap = snapshot(
        {"sparse_00": ("coverage", 0.5), "dense_0": ("distribution", 0.8)}
    )
    exs = [example(rid=r) for r in range(1000)]
    start = time.perf_counter()
    for ex in exs:
        apply_fading(ex, snap)
    assert time.perf_counter() - start < 1.0
