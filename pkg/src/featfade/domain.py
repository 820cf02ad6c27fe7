"""Shared domain types: features, fading schedules, rollouts, examples, metrics.

All types are immutable value objects except :class:`Rollout`, which is
mutated only by the control plane. Every type serializes to a canonical
JSON-compatible dict (``to_dict``/``from_dict``) with stable field names;
``to_json``/``from_json`` wrap that in deterministic, human-readable JSON used
by config files, the wire API, and golden tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Union

from .errors import ConfigError

FeatureValue = Union[int, float, tuple]


class FeatureKind(str, Enum):
    SPARSE_ID = "sparse-id"
    EMBEDDING = "embedding"
    DENSE = "dense"


class ScheduleMode(str, Enum):
    COVERAGE = "coverage"
    DISTRIBUTION = "distribution"


class RolloutState(str, Enum):
    PENDING = "Pending"
    ACTIVE = "Active"
    PAUSED = "Paused"
    COMPLETED = "Completed"
    ROLLED_BACK = "RolledBack"


#: Legal rollout state transitions. Completed and RolledBack are terminal.
LEGAL_TRANSITIONS: dict[RolloutState, frozenset[RolloutState]] = {
    RolloutState.PENDING: frozenset({RolloutState.ACTIVE}),
    RolloutState.ACTIVE: frozenset(
        {RolloutState.PAUSED, RolloutState.COMPLETED, RolloutState.ROLLED_BACK}
    ),
    RolloutState.PAUSED: frozenset({RolloutState.ACTIVE, RolloutState.ROLLED_BACK}),
    RolloutState.COMPLETED: frozenset(),
    RolloutState.ROLLED_BACK: frozenset(),
}

TERMINAL_STATES = frozenset({RolloutState.COMPLETED, RolloutState.ROLLED_BACK})


class GuardrailVerdict(str, Enum):
    OK = "ok"
    PAUSED = "paused"
    ROLLED_BACK = "rolled_back"


def _check_fraction(value: float, name: str) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")


@dataclass(frozen=True)
class FeatureId:
    """A named feature slot. Names are unique within a deployment."""

    name: str
    kind: FeatureKind

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "kind": self.kind.value}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FeatureId":
        return cls(name=d["name"], kind=FeatureKind(d["kind"]))


@dataclass(frozen=True)
class FadingSchedule:
    """Ramp parameters: start day, per-day rate, endpoints, and control mode.

    ``rate_per_day == 0`` means coverage holds at ``initial_coverage``
    forever. ``target_coverage >= initial_coverage`` makes this a fade-in.
    """

    start_day: int
    rate_per_day: float
    initial_coverage: float
    target_coverage: float
    mode: ScheduleMode = ScheduleMode.COVERAGE

    def __post_init__(self):
        if self.start_day < 0:
            raise ValueError(f"start_day must be >= 0, got {self.start_day}")
        _check_fraction(self.rate_per_day, "rate_per_day")
        _check_fraction(self.initial_coverage, "initial_coverage")
        _check_fraction(self.target_coverage, "target_coverage")

    @property
    def is_fade_in(self) -> bool:
        return self.target_coverage > self.initial_coverage

    def to_dict(self) -> dict[str, Any]:
        return {
            "start_day": self.start_day,
            "rate_per_day": self.rate_per_day,
            "initial_coverage": self.initial_coverage,
            "target_coverage": self.target_coverage,
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FadingSchedule":
        return cls(
            start_day=int(d["start_day"]),
            rate_per_day=float(d["rate_per_day"]),
            initial_coverage=float(d["initial_coverage"]),
            target_coverage=float(d["target_coverage"]),
            mode=ScheduleMode(d.get("mode", "coverage")),
        )


@dataclass(frozen=True)
class RolloutPolicy:
    """A fading schedule bound to a feature set plus safety constraints."""

    features: tuple[FeatureId, ...]
    schedule: FadingSchedule
    max_daily_ne_increase: float
    max_cumulative_ne_increase: float
    max_duration_days: int

    def __post_init__(self):
        if not self.features:
            raise ValueError("policy must name at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate features in policy: {names}")
        if self.max_daily_ne_increase <= 0 or self.max_cumulative_ne_increase <= 0:
            raise ValueError("guardrail thresholds must be strictly positive")
        if self.max_duration_days <= 0:
            raise ValueError("max_duration_days must be > 0")

    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def to_dict(self) -> dict[str, Any]:
        return {
            "features": [f.to_dict() for f in self.features],
            "schedule": self.schedule.to_dict(),
            "max_daily_ne_increase": self.max_daily_ne_increase,
            "max_cumulative_ne_increase": self.max_cumulative_ne_increase,
            "max_duration_days": self.max_duration_days,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RolloutPolicy":
        return cls(
            features=tuple(FeatureId.from_dict(f) for f in d["features"]),
            schedule=FadingSchedule.from_dict(d["schedule"]),
            max_daily_ne_increase=float(d["max_daily_ne_increase"]),
            max_cumulative_ne_increase=float(d["max_cumulative_ne_increase"]),
            max_duration_days=int(d["max_duration_days"]),
        )


@dataclass(frozen=True)
class HistoryEntry:
    """One rollout lifecycle event: (day, transition, reason)."""

    day: int
    transition: str
    reason: str

    def to_list(self) -> list:
        return [self.day, self.transition, self.reason]

    @classmethod
    def from_list(cls, row) -> "HistoryEntry":
        return cls(day=int(row[0]), transition=str(row[1]), reason=str(row[2]))


@dataclass
class Rollout:
    """A policy plus its lifecycle state. Mutated only by the control plane."""

    id: str
    policy: RolloutPolicy
    state: RolloutState = RolloutState.PENDING
    paused_days_accumulated: int = 0
    created_day: int = 0
    history: list[HistoryEntry] = field(default_factory=list)

    @property
    def is_terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def activation_day(self) -> int | None:
        """Day of the first transition into Active, or None if never activated."""
        for entry in self.history:
            if entry.transition.endswith("->Active"):
                return entry.day
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "policy": self.policy.to_dict(),
            "state": self.state.value,
            "paused_days_accumulated": self.paused_days_accumulated,
            "created_day": self.created_day,
            "history": [h.to_list() for h in self.history],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Rollout":
        return cls(
            id=d["id"],
            policy=RolloutPolicy.from_dict(d["policy"]),
            state=RolloutState(d["state"]),
            paused_days_accumulated=int(d["paused_days_accumulated"]),
            created_day=int(d["created_day"]),
            history=[HistoryEntry.from_list(row) for row in d["history"]],
        )


def _freeze_value(value) -> FeatureValue:
    if isinstance(value, list):
        return tuple(float(v) for v in value)
    if isinstance(value, bool):
        raise ValueError("feature values cannot be booleans")
    return value


@dataclass(frozen=True)
class Example:
    """One request: feature map, binary label, day index.

    Values are ints for sparse-id features, floats for dense, and fixed-length
    float tuples for embeddings; the map is keyed by feature name.
    """

    request_id: int
    features: Mapping[str, FeatureValue]
    label: int
    day: int

    def __post_init__(self):
        if not (0 <= self.request_id < 2**64):
            raise ValueError("request_id must be a 64-bit unsigned integer")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "features": {
                n: (list(v) if isinstance(v, tuple) else v)
                for n, v in sorted(self.features.items())
            },
            "label": self.label,
            "day": self.day,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Example":
        return cls(
            request_id=int(d["request_id"]),
            features={n: _freeze_value(v) for n, v in d["features"].items()},
            label=int(d["label"]),
            day=int(d["day"]),
        )


@dataclass(frozen=True)
class LoggedExample:
    """An example as served: post-fading values plus the coverage snapshot used.

    Feature values are bit-identical to what the adapter produced for
    inference; this is the record recurring training consumes.
    """

    request_id: int
    features: Mapping[str, FeatureValue]
    label: int
    day: int
    effective_coverage_snapshot: Mapping[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "features": {
                n: (list(v) if isinstance(v, tuple) else v)
                for n, v in sorted(self.features.items())
            },
            "label": self.label,
            "day": self.day,
            "effective_coverage_snapshot": dict(
                sorted(self.effective_coverage_snapshot.items())
            ),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LoggedExample":
        return cls(
            request_id=int(d["request_id"]),
            features={n: _freeze_value(v) for n, v in d["features"].items()},
            label=int(d["label"]),
            day=int(d["day"]),
            effective_coverage_snapshot={
                n: float(v) for n, v in d["effective_coverage_snapshot"].items()
            },
        )


@dataclass(frozen=True)
class MetricPoint:
    """Per-day stability readout: NE, calibration means, coverages, verdict."""

    day: int
    ne: float
    mean_prediction: float
    mean_label: float
    coverage_snapshot: Mapping[str, float]
    guardrail_verdict: GuardrailVerdict = GuardrailVerdict.OK

    def __post_init__(self):
        if self.ne < 0:
            raise ValueError(f"ne must be nonnegative, got {self.ne}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "day": self.day,
            "ne": self.ne,
            "mean_prediction": self.mean_prediction,
            "mean_label": self.mean_label,
            "coverage_snapshot": dict(sorted(self.coverage_snapshot.items())),
            "guardrail_verdict": self.guardrail_verdict.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "MetricPoint":
        return cls(
            day=int(d["day"]),
            ne=float(d["ne"]),
            mean_prediction=float(d["mean_prediction"]),
            mean_label=float(d["mean_label"]),
            coverage_snapshot={n: float(v) for n, v in d["coverage_snapshot"].items()},
            guardrail_verdict=GuardrailVerdict(d["guardrail_verdict"]),
        )


def to_json(obj) -> str:
    """Canonical JSON for any domain object (or plain dict): sorted, indented."""
    payload = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def parse_json(text: str, source: str = "<string>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
