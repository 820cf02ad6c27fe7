"""Metric guardrails: watch per-day NE during a rollout and decide
ok / pause / rollback.

The baseline is the trailing mean of NE over the days strictly before the
rollout activated (there is no concurrent control group in a single run, so
pre-rollout history is the only available reference). Cumulative breach is
checked before daily breach: sustained damage is the stronger signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .domain import MetricPoint
from .errors import InsufficientHistoryError

# Defaults calibrated 1.5x above the worst excursions observed across 10
# baseline seeds of the shipped world (worst daily +0.0296, worst cumulative
# +0.0213); see scripts/calibrate_noise_band.py.
DEFAULT_MAX_DAILY_NE_INCREASE = 0.045
DEFAULT_MAX_CUMULATIVE_NE_INCREASE = 0.032


class GuardrailAction(str, Enum):
    PAUSE = "pause"
    ROLLBACK = "rollback"


class Verdict(str, Enum):
    OK = "ok"
    PAUSE = "pause"
    ROLLBACK = "rollback"


@dataclass(frozen=True)
class GuardrailConfig:
    """Thresholds plus the action taken when each one is breached."""

    max_daily_ne_increase: float = DEFAULT_MAX_DAILY_NE_INCREASE
    max_cumulative_ne_increase: float = DEFAULT_MAX_CUMULATIVE_NE_INCREASE
    baseline_window_days: int = 5
    action_on_daily_breach: GuardrailAction = GuardrailAction.PAUSE
    action_on_cumulative_breach: GuardrailAction = GuardrailAction.ROLLBACK

    def __post_init__(self):
        if self.max_daily_ne_increase <= 0 or self.max_cumulative_ne_increase <= 0:
            raise ValueError("guardrail thresholds must be strictly positive")
        if self.baseline_window_days < 2:
            raise ValueError("baseline_window_days must be >= 2")

    def to_dict(self) -> dict:
        return {
            "max_daily_ne_increase": self.max_daily_ne_increase,
            "max_cumulative_ne_increase": self.max_cumulative_ne_increase,
            "baseline_window_days": self.baseline_window_days,
            "action_on_daily_breach": self.action_on_daily_breach.value,
            "action_on_cumulative_breach": self.action_on_cumulative_breach.value,
        }

    @classmethod
    def from_dict(cls, d) -> "GuardrailConfig":
        return cls(
            max_daily_ne_increase=float(d["max_daily_ne_increase"]),
            max_cumulative_ne_increase=float(d["max_cumulative_ne_increase"]),
            baseline_window_days=int(d.get("baseline_window_days", 5)),
            action_on_daily_breach=GuardrailAction(d.get("action_on_daily_breach", "pause")),
            action_on_cumulative_breach=GuardrailAction(
                d.get("action_on_cumulative_breach", "rollback")
            ),
        )


def baseline_ne(
    config: GuardrailConfig, history: Sequence[MetricPoint], rollout_start_day: int
) -> float:
    """Mean NE over the last `baseline_window_days` strictly before the rollout."""
    pre = [p.ne for p in history if p.day < rollout_start_day]
    if len(pre) < config.baseline_window_days:
        raise InsufficientHistoryError(
            f"need {config.baseline_window_days} pre-rollout days, have {len(pre)}"
        )
    window = pre[-config.baseline_window_days :]
    return sum(window) / len(window)


def evaluate(
    config: GuardrailConfig,
    history: Sequence[MetricPoint],
    rollout_start_day: int,
) -> Verdict:
    """Verdict for the newest point in `history`, pure and deterministic."""
    if not history:
        raise ValueError("history must be non-empty")
    today = history[-1]
    if today.day < rollout_start_day:
        return Verdict.OK
    base = baseline_ne(config, history, rollout_start_day)
    if today.ne - base > config.max_cumulative_ne_increase:
        return Verdict(config.action_on_cumulative_breach.value)
    if len(history) >= 2:
        daily = today.ne - history[-2].ne
        if daily > config.max_daily_ne_increase:
            return Verdict(config.action_on_daily_breach.value)
    return Verdict.OK
