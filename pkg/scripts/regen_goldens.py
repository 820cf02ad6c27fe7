#!/usr/bin/env python3
"""Regenerate the golden files under tests/golden/.

Run after any intentional change to the default world, schedule math, gating
hash, model, or report formats, then review the diff before committing.
"""

from __future__ import annotations

from pathlib import Path

from featfade.control_plane import ControlPlane
from featfade.domain import FadingSchedule, FeatureId, FeatureKind, RolloutPolicy, to_json
from featfade.harness import load_preset, run_scenario
from featfade.world import WorldConfig

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"


def fading_report_goldens() -> None:
    world = WorldConfig()
    report = run_scenario(world, load_preset("deprecation-fade", world))
    (GOLDEN_DIR / "deprecation-fade.csv").write_text(report.csv_text())
    (GOLDEN_DIR / "deprecation-fade.summary.json").write_text(report.summary_json())


def control_plane_dump_golden() -> None:
    features = [
        FeatureId("dense_0", FeatureKind.DENSE),
        FeatureId("sparse_00", FeatureKind.SPARSE_ID),
        FeatureId("sparse_01", FeatureKind.SPARSE_ID),
    ]
    plane = ControlPlane(features)
    rollout = plane.create_rollout(
        RolloutPolicy(
            features=(features[1], features[2]),
            schedule=FadingSchedule(
                start_day=2, rate_per_day=0.25, initial_coverage=1.0,
                target_coverage=0.0,
            ),
            max_daily_ne_increase=0.045,
            max_cumulative_ne_increase=0.032,
            max_duration_days=30,
        )
    )
    for _ in range(3):
        plane.advance_day()
    plane.pause(rollout.id)
    plane.advance_day()
    plane.resume(rollout.id)
    plane.advance_day()
    (GOLDEN_DIR / "control_plane_dump.json").write_text(to_json(plane.dump_state()))


if __name__ == "__main__":
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    fading_report_goldens()
    control_plane_dump_golden()
    for path in sorted(GOLDEN_DIR.iterdir()):
        print(f"wrote {path}")
