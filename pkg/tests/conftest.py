from __future__ import annotations

import time

import pytest

from featfade.domain import FadingSchedule, FeatureId, FeatureKind, RolloutPolicy
from featfade.world import WorldConfig

#: The five paired seeds of the shipped comparison.
PAIRED_SEEDS = (1001, 1002, 1003, 1004, 1005)


@pytest.fixture(scope="session")
def default_world() -> WorldConfig:
    return WorldConfig()


class PairedRuns(list):
    """The paired scenario runs plus how long they took to produce."""

    elapsed_seconds: float = 0.0


@pytest.fixture(scope="session")
def paired_reports() -> PairedRuns:
    """(zero_out, fading) reports for the 5 paired seeds of the default world,
    plus the wall-clock seconds the 10 runs took. Computed once per session;
    shared by the acceptance criteria and the golden-file pins."""
    from featfade.harness import load_preset, run_scenario

    pairs = PairedRuns()
    start = time.perf_counter()
    for seed in PAIRED_SEEDS:
        world = WorldConfig(seed=seed)
        zero = run_scenario(world, load_preset("zero-out", world))
        fade = run_scenario(world, load_preset("deprecation-fade", world))
        pairs.append((zero, fade))
    pairs.elapsed_seconds = time.perf_counter() - start
    return pairs


@pytest.fixture(scope="session")
def small_world() -> WorldConfig:
    """A fast world for functional tests: same structure, 1/10 the traffic."""
    return WorldConfig(
        seed=4242,
        requests_per_day=2000,
        holdout_per_day=3000,
        n_days=30,
        latent_cardinality=200,
    )


def make_policy(
    features,
    start_day=5,
    rate=0.1,
    initial=1.0,
    target=0.0,
    mode="coverage",
    max_daily=10.0,
    max_cumulative=10.0,
    max_duration=1000,
) -> RolloutPolicy:
    from featfade.domain import ScheduleMode

    return RolloutPolicy(
        features=tuple(features),
        schedule=FadingSchedule(
            start_day=start_day,
            rate_per_day=rate,
            initial_coverage=initial,
            target_coverage=target,
            mode=ScheduleMode(mode),
        ),
        max_daily_ne_increase=max_daily,
        max_cumulative_ne_increase=max_cumulative,
        max_duration_days=max_duration,
    )


@pytest.fixture
def sparse_feature() -> FeatureId:
    return FeatureId("sparse_00", FeatureKind.SPARSE_ID)


@pytest.fixture
def dense_feature() -> FeatureId:
    return FeatureId("dense_0", FeatureKind.DENSE)
