"""Pydantic request/response models for the /v1 wire API.

Every response is wrapped in an envelope carrying the server day, the
current snapshot version, and the caller's echoed request id.
"""

from __future__ import annotations

from typing import Generic, Optional, TypeVar

from pydantic import BaseModel, Field

PayloadT = TypeVar("PayloadT")


class Envelope(BaseModel, Generic[PayloadT]):
    payload: PayloadT
    day: int
    snapshot_version: int
    echo_id: Optional[str] = None


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorEnvelope(BaseModel):
    error: ErrorBody
    day: int
    snapshot_version: int
    echo_id: Optional[str] = None


class FeatureModel(BaseModel):
    name: str
    kind: str


class ScheduleModel(BaseModel):
    start_day: int = Field(ge=0)
    rate_per_day: float = Field(ge=0.0, le=1.0)
    initial_coverage: float = Field(ge=0.0, le=1.0)
    target_coverage: float = Field(ge=0.0, le=1.0)
    mode: str = "coverage"


class CreateRolloutRequest(BaseModel):
    features: list[str] = Field(min_length=1)
    schedule: ScheduleModel
    max_daily_ne_increase: float = Field(gt=0.0)
    max_cumulative_ne_increase: float = Field(gt=0.0)
    max_duration_days: int = Field(gt=0)
    rollout_id: Optional[str] = None


class HistoryEntryModel(BaseModel):
    day: int
    transition: str
    reason: str


class RolloutModel(BaseModel):
    id: str
    state: str
    features: list[str]
    schedule: ScheduleModel
    max_daily_ne_increase: float
    max_cumulative_ne_increase: float
    max_duration_days: int
    paused_days_accumulated: int
    created_day: int
    current_coverage: Optional[float] = None
    history: list[HistoryEntryModel]


class StateModel(BaseModel):
    day: int
    snapshot_version: int
    features: list[FeatureModel]
    rollout_count: int
    auto_step_seconds_per_day: Optional[float] = None


class MetricPointModel(BaseModel):
    day: int
    ne: float
    mean_prediction: float
    mean_label: float
    coverage_snapshot: dict[str, float]
    guardrail_verdict: str


class StepRequest(BaseModel):
    days: int = Field(default=1, ge=1, le=1000)


class StepResult(BaseModel):
    days_run: int
    day: int
    guardrail_verdicts: list[str]


class RateRequest(BaseModel):
    rate_per_day: float = Field(ge=0.0, le=1.0)


class AutoStepRequest(BaseModel):
    seconds_per_day: float = Field(gt=0.0, le=3600.0)


class AutoStepState(BaseModel):
    enabled: bool
    seconds_per_day: Optional[float] = None


class RolloutListModel(BaseModel):
    rollouts: list[RolloutModel]


class MetricsModel(BaseModel):
    points: list[MetricPointModel]
