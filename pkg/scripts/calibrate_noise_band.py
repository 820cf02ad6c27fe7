#!/usr/bin/env python3
"""Calibrate the baseline NE noise band and guardrail default thresholds.

Runs the baseline scenario over 10 seeds, with a zero-rate (no-op) rollout
active so the guardrail sees exactly the noise a quiet rollout would. Prints:
  - the pooled std of day-over-day NE deltas and the 3x band used by
    compare_runs noise checks,
  - the worst daily delta and worst cumulative excursion vs the trailing
    baseline across all seeds, which bound the guardrail defaults from below.

The frozen constants live in featfade/harness.py (DEFAULT_NE_NOISE_BAND) and
featfade/guardrail.py (DEFAULT_MAX_*); re-run this script after changing the
default world and update them if they moved.
"""

from __future__ import annotations

import numpy as np

from featfade.domain import FadingSchedule, RolloutPolicy
from featfade.harness import ScenarioConfig, ScenarioKind, run_scenario
from featfade.world import WorldConfig

N_SEEDS = 10
BASE_SEED = 1001
WARMUP = 15


def noop_scenario(world: WorldConfig) -> ScenarioConfig:
    features = tuple(
        f for f in world.features() if f.name in world.informative_names
    )
    policy = RolloutPolicy(
        features=features,
        schedule=FadingSchedule(
            start_day=WARMUP,
            rate_per_day=0.0,
            initial_coverage=1.0,
            target_coverage=1.0,
        ),
        max_daily_ne_increase=10.0,
        max_cumulative_ne_increase=10.0,
        max_duration_days=10000,
    )
    return ScenarioConfig(
        name="noop-hold", kind=ScenarioKind.BASELINE, policies=(policy,),
        warmup_days=WARMUP,
    )


def main() -> None:
    daily_deltas: list[float] = []
    worst_daily = 0.0
    worst_cum = 0.0
    for i in range(N_SEEDS):
        world = WorldConfig(seed=BASE_SEED + i)
        report = run_scenario(world, noop_scenario(world))
        ne = np.array([p.ne for p in report.series])
        days = np.array([p.day for p in report.series])
        post = days >= WARMUP
        deltas = np.diff(ne)[post[1:]]
        daily_deltas.extend(deltas.tolist())
        worst_daily = max(worst_daily, float(deltas.max()))
        baseline = ne[(days < WARMUP)][-5:].mean()
        worst_cum = max(worst_cum, float((ne[post] - baseline).max()))
        print(
            f"seed {world.seed}: daily-delta std {deltas.std():.5f} "
            f"max {deltas.max():+.5f}  max cumulative {float((ne[post] - baseline).max()):+.5f}"
        )
    std = float(np.std(daily_deltas))
    print(f"\npooled daily-delta std: {std:.5f}")
    print(f"3x band (compare noise band): {3 * std:.5f}")
    print(f"worst daily delta across seeds:      {worst_daily:.5f}")
    print(f"worst cumulative excursion: {worst_cum:.5f}")
    print("suggested guardrail defaults: max_daily >= "
          f"{1.5 * worst_daily:.4f}, max_cumulative >= {1.5 * worst_cum:.4f}")


if __name__ == "__main__":
    main()
