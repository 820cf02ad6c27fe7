"""Pure evaluation of fading schedules into per-day coverage/scale values.

Coverage is always recomputed from (elapsed active days, rate, endpoints)
rather than accumulated, so repeated evaluation never drifts. A pause freezes
elapsed fading time: every paused day shifts the remaining ramp right by one
day and the coverage holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .domain import FadingSchedule, ScheduleMode
from .errors import InvalidScheduleError


def effective_coverage(schedule: FadingSchedule, day: int, paused_days: int = 0) -> float:
    """Coverage fraction on `day` given `paused_days` spent paused so far."""
    if day < 0:
        raise ValueError(f"day must be >= 0, got {day}")
    if paused_days < 0:
        raise ValueError(f"paused_days must be >= 0, got {paused_days}")
    elapsed = max(0, day - schedule.start_day - paused_days)
    c0 = schedule.initial_coverage
    target = schedule.target_coverage
    if schedule.is_fade_in:
        return min(target, c0 + schedule.rate_per_day * elapsed)
    return max(target, c0 - schedule.rate_per_day * elapsed)


def effective_scale(schedule: FadingSchedule, day: int, paused_days: int = 0) -> float:
    """The multiplicative value scale for a distribution-mode schedule.

    Same ramp as `effective_coverage`, interpreted as a factor applied to
    feature values instead of a keep probability.
    """
    if schedule.mode is not ScheduleMode.DISTRIBUTION:
        raise InvalidScheduleError(
            "effective_scale requires a distribution-mode schedule"
        )
    return effective_coverage(schedule, day, paused_days)


def completion_day(schedule: FadingSchedule) -> int:
    """Smallest active-day index at which the ramp reaches its target.

    Exact: the day count is ceil(|c0 - target| / rate) computed on the
    rational values of the stored floats, so e.g. a 0.9 span at rate 0.1
    yields 9 days, never 10.
    """
    if schedule.rate_per_day == 0:
        raise InvalidScheduleError("a zero-rate schedule never completes")
    span = Fraction(schedule.initial_coverage) - Fraction(schedule.target_coverage)
    steps = math.ceil(abs(span) / Fraction(schedule.rate_per_day))
    return schedule.start_day + steps


@dataclass(frozen=True)
class CoverageCurve:
    """Per-day effective coverage derived from a schedule and pause history."""

    values: tuple[float, ...]

    @classmethod
    def from_schedule(
        cls,
        schedule: FadingSchedule,
        n_days: int,
        paused_days_by_day: Sequence[int] | None = None,
    ) -> "CoverageCurve":
        """Evaluate days 0..n_days-1. `paused_days_by_day[d]` is the number of
        paused days accumulated by day d (all zero when omitted)."""
        if paused_days_by_day is None:
            paused = [0] * n_days
        else:
            if len(paused_days_by_day) != n_days:
                raise ValueError("paused_days_by_day must have one entry per day")
            paused = list(paused_days_by_day)
        return cls(
            values=tuple(
                effective_coverage(schedule, d, paused[d]) for d in range(n_days)
            )
        )

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, day: int) -> float:
        return self.values[day]
