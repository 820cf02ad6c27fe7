"""FastAPI service exposing the control plane and live simulation.

One server owns one SimulationSession. All mutations funnel through the
session's control-plane lock (single writer); reads serve the latest
immutable snapshot. The simulated clock only moves on explicit step calls or
through the operator-enabled auto-step timer. Mutating endpoints are
idempotent per supplied `Idempotency-Key` header: replays return the cached
response without re-applying.
"""

from __future__ import annotations

import threading
from contextlib import asynccontextmanager
from typing import Callable, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..control_plane import ControlPlane
from ..domain import FadingSchedule, Rollout, RolloutPolicy, ScheduleMode
from ..errors import FadeError, UnknownFeatureError
from ..guardrail import GuardrailConfig
from ..harness import ScenarioConfig, SimulationSession
from ..world import WorldConfig
from .models import (
    AutoStepRequest,
    AutoStepState,
    CreateRolloutRequest,
    Envelope,
    ErrorBody,
    ErrorEnvelope,
    FeatureModel,
    HistoryEntryModel,
    MetricPointModel,
    MetricsModel,
    RateRequest,
    RolloutListModel,
    RolloutModel,
    ScheduleModel,
    StateModel,
    StepRequest,
    StepResult,
)

_STATUS_BY_CODE = {
    "unknown-rollout": 404,
    "illegal-transition": 409,
    "feature-conflict": 409,
    "unknown-feature": 400,
    "invalid-schedule": 400,
    "out-of-order-day": 409,
    "insufficient-history": 409,
    "config-parse": 400,
}


class _AutoStepper:
    """Background thread stepping the clock at a wall-time cadence."""

    def __init__(self, step: Callable[[], None], seconds_per_day: float):
        self.seconds_per_day = seconds_per_day
        self._step = step
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.wait(self.seconds_per_day):
            try:
                self._step()
            except Exception:
                # a failed step must not kill the timer thread; the next
                # explicit API call will surface the error
                continue

    def stop(self) -> None:
        self._stop.set()


class ServiceState:
    """Everything one server instance owns."""

    def __init__(self, session: SimulationSession):
        self.session = session
        self.lock = threading.RLock()
        self.idempotency_cache: dict[tuple[str, str, str], tuple[int, dict]] = {}
        self.auto_stepper: Optional[_AutoStepper] = None

    def stop(self) -> None:
        if self.auto_stepper is not None:
            self.auto_stepper.stop()
            self.auto_stepper = None


def _rollout_model(plane: ControlPlane, rollout: Rollout) -> RolloutModel:
    sched = rollout.policy.schedule
    coverage = plane.current_coverage(rollout.id)
    return RolloutModel(
        id=rollout.id,
        state=rollout.state.value,
        features=list(rollout.policy.feature_names()),
        schedule=ScheduleModel(**sched.to_dict()),
        max_daily_ne_increase=rollout.policy.max_daily_ne_increase,
        max_cumulative_ne_increase=rollout.policy.max_cumulative_ne_increase,
        max_duration_days=rollout.policy.max_duration_days,
        paused_days_accumulated=rollout.paused_days_accumulated,
        created_day=rollout.created_day,
        current_coverage=coverage,
        history=[
            HistoryEntryModel(day=h.day, transition=h.transition, reason=h.reason)
            for h in rollout.history
        ],
    )


def create_app(
    world_config: WorldConfig | None = None,
    scenario: ScenarioConfig | None = None,
    guardrail: GuardrailConfig | None = None,
) -> FastAPI:
    """Build the service around a fresh simulation session.

    If a scenario is given, its rollout policies are created up front (the
    operator then steps the clock to watch them progress)."""
    config = world_config or WorldConfig()
    session = SimulationSession(
        config,
        guardrail=guardrail,
        injected_ne_step=scenario.injected_ne_step if scenario else None,
    )
    if scenario is not None:
        for policy in scenario.policies:
            session.create_rollout(policy)

    state = ServiceState(session)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        state.stop()

    app = FastAPI(title="featfade control plane", version="1.0", lifespan=lifespan)
    app.state.service = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    plane = session.plane

    def envelope(payload, echo_id: Optional[str]) -> dict:
        return Envelope(
            payload=payload,
            day=plane.day,
            snapshot_version=plane.snapshot.version,
            echo_id=echo_id,
        ).model_dump()

    def echo_of(request: Request) -> Optional[str]:
        return request.headers.get("X-Request-Id")

    @app.exception_handler(FadeError)
    async def fade_error_handler(request: Request, exc: FadeError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        body = ErrorEnvelope(
            error=ErrorBody(code=exc.code, message=exc.message),
            day=plane.day,
            snapshot_version=plane.snapshot.version,
            echo_id=echo_of(request),
        )
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        body = ErrorEnvelope(
            error=ErrorBody(code="invalid-request", message=str(exc)),
            day=plane.day,
            snapshot_version=plane.snapshot.version,
            echo_id=echo_of(request),
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    def idempotent(
        request: Request, response_payload: Callable[[], dict]
    ) -> JSONResponse:
        """Run a mutation once per (method, path, Idempotency-Key)."""
        key = request.headers.get("Idempotency-Key")
        cache_key = (request.method, request.url.path, key or "")
        if key is not None and cache_key in state.idempotency_cache:
            status, body = state.idempotency_cache[cache_key]
            return JSONResponse(status_code=status, content=body)
        body = response_payload()
        if key is not None:
            state.idempotency_cache[cache_key] = (200, body)
        return JSONResponse(status_code=200, content=body)

    # -- read endpoints ---------------------------------------------------------

    @app.get("/v1/state")
    def get_state(request: Request):
        stepper = state.auto_stepper
        payload = StateModel(
            day=plane.day,
            snapshot_version=plane.snapshot.version,
            features=[
                FeatureModel(name=f.name, kind=f.kind.value) for f in plane.features()
            ],
            rollout_count=len(plane.rollouts()),
            auto_step_seconds_per_day=(
                stepper.seconds_per_day if stepper is not None else None
            ),
        )
        return envelope(payload.model_dump(), echo_of(request))

    @app.get("/v1/rollouts")
    def list_rollouts(request: Request):
        payload = RolloutListModel(
            rollouts=[_rollout_model(plane, r) for r in plane.rollouts()]
        )
        return envelope(payload.model_dump(), echo_of(request))

    @app.get("/v1/rollouts/{rollout_id}")
    def get_rollout(rollout_id: str, request: Request):
        rollout = plane.get_rollout(rollout_id)
        return envelope(_rollout_model(plane, rollout).model_dump(), echo_of(request))

    @app.get("/v1/metrics")
    def get_metrics(request: Request, since_day: int = -1):
        points = [
            MetricPointModel(**p.to_dict())
            for p in session.metrics
            if p.day > since_day
        ]
        return envelope(MetricsModel(points=points).model_dump(), echo_of(request))

    # -- mutations ------------------------------------------------------------

    @app.post("/v1/rollouts")
    def create_rollout(body: CreateRolloutRequest, request: Request):
        def apply() -> dict:
            with state.lock:
                registered = {f.name: f for f in plane.features()}
                features = []
                for name in body.features:
                    if name not in registered:
                        raise UnknownFeatureError(f"unknown feature {name!r}")
                    features.append(registered[name])
                policy = RolloutPolicy(
                    features=tuple(features),
                    schedule=FadingSchedule(
                        start_day=body.schedule.start_day,
                        rate_per_day=body.schedule.rate_per_day,
                        initial_coverage=body.schedule.initial_coverage,
                        target_coverage=body.schedule.target_coverage,
                        mode=ScheduleMode(body.schedule.mode),
                    ),
                    max_daily_ne_increase=body.max_daily_ne_increase,
                    max_cumulative_ne_increase=body.max_cumulative_ne_increase,
                    max_duration_days=body.max_duration_days,
                )
                rollout = session.create_rollout(policy, body.rollout_id)
                return envelope(
                    _rollout_model(plane, rollout).model_dump(), echo_of(request)
                )

        return idempotent(request, apply)

    @app.post("/v1/rollouts/{rollout_id}/pause")
    def pause_rollout(rollout_id: str, request: Request):
        def apply() -> dict:
            with state.lock:
                rollout = plane.pause(rollout_id, reason="operator")
                return envelope(
                    _rollout_model(plane, rollout).model_dump(), echo_of(request)
                )

        return idempotent(request, apply)

    @app.post("/v1/rollouts/{rollout_id}/resume")
    def resume_rollout(rollout_id: str, request: Request):
        def apply() -> dict:
            with state.lock:
                rollout = plane.resume(rollout_id, reason="operator")
                return envelope(
                    _rollout_model(plane, rollout).model_dump(), echo_of(request)
                )

        return idempotent(request, apply)

    @app.post("/v1/rollouts/{rollout_id}/rollback")
    def rollback_rollout(rollout_id: str, request: Request):
        def apply() -> dict:
            with state.lock:
                rollout = plane.rollback(rollout_id, reason="operator")
                return envelope(
                    _rollout_model(plane, rollout).model_dump(), echo_of(request)
                )

        return idempotent(request, apply)

    @app.patch("/v1/rollouts/{rollout_id}/rate")
    def adjust_rate(rollout_id: str, body: RateRequest, request: Request):
        def apply() -> dict:
            with state.lock:
                rollout = plane.adjust_rate(rollout_id, body.rate_per_day)
                return envelope(
                    _rollout_model(plane, rollout).model_dump(), echo_of(request)
                )

        return idempotent(request, apply)

    @app.post("/v1/clock/step")
    def step_clock(request: Request, days: int = 1, body: StepRequest | None = None):
        n_days = body.days if body is not None else days
        if n_days < 1:
            n_days = 1

        def apply() -> dict:
            with state.lock:
                verdicts = []
                for _ in range(n_days):
                    point = session.step_day()
                    verdicts.append(point.guardrail_verdict.value)
                payload = StepResult(
                    days_run=n_days, day=plane.day, guardrail_verdicts=verdicts
                )
                return envelope(payload.model_dump(), echo_of(request))

        return idempotent(request, apply)

    @app.post("/v1/clock/auto")
    def enable_auto(body: AutoStepRequest, request: Request):
        def apply() -> dict:
            with state.lock:
                if state.auto_stepper is not None:
                    state.auto_stepper.stop()

                def one_step() -> None:
                    with state.lock:
                        session.step_day()

                state.auto_stepper = _AutoStepper(one_step, body.seconds_per_day)
                payload = AutoStepState(
                    enabled=True, seconds_per_day=body.seconds_per_day
                )
                return envelope(payload.model_dump(), echo_of(request))

        return idempotent(request, apply)

    @app.delete("/v1/clock/auto")
    def disable_auto(request: Request):
        def apply() -> dict:
            with state.lock:
                if state.auto_stepper is not None:
                    state.auto_stepper.stop()
                    state.auto_stepper = None
                payload = AutoStepState(enabled=False, seconds_per_day=None)
                return envelope(payload.model_dump(), echo_of(request))

        return idempotent(request, apply)

    return app
