"""The centralized rollout authority: policies, lifecycle, clock, snapshots.

Single-writer discipline: every mutation (create / pause / resume / rollback
/ rate adjustment / advance_day) goes through one lock and republishes the
coverage snapshot, so readers always see either the old or the new snapshot,
never a mix. The clock is advanced explicitly, never by wall time.
"""

from __future__ import annotations

import itertools
import threading
from typing import Iterable, Sequence

from .adapter import CoverageSnapshot
from .domain import (
    LEGAL_TRANSITIONS,
    FeatureId,
    FeatureKind,
    HistoryEntry,
    MetricPoint,
    Rollout,
    RolloutPolicy,
    RolloutState,
    ScheduleMode,
)
from .errors import (
    FeatureConflictError,
    IllegalTransitionError,
    InsufficientHistoryError,
    InvalidScheduleError,
    UnknownFeatureError,
    UnknownRolloutError,
)
from .guardrail import GuardrailConfig, Verdict, evaluate
from .schedule import completion_day, effective_coverage


class ControlPlane:
    """Owns registered features, rollouts, the simulated day, and snapshots."""

    def __init__(
        self,
        features: Iterable[FeatureId] = (),
        guardrail: GuardrailConfig | None = None,
    ):
        self._lock = threading.RLock()
        self._features: dict[str, FeatureId] = {}
        self._rollouts: dict[str, Rollout] = {}
        # rollback restores the coverage the rollout was created with, even
        # if the schedule was later rebased by a rate adjustment
        self._restore_coverage: dict[str, float] = {}
        self._ids = itertools.count(1)
        self.day = 0
        self.guardrail = guardrail or GuardrailConfig()
        self._snapshot = CoverageSnapshot(entries={}, version=0)
        for f in features:
            self.register_feature(f)
        self._publish()

    # -- feature registry ---------------------------------------------------

    def register_feature(self, feature: FeatureId) -> None:
        with self._lock:
            existing = self._features.get(feature.name)
            if existing is not None and existing.kind is not feature.kind:
                raise FeatureConflictError(
                    f"feature {feature.name!r} already registered with kind "
                    f"{existing.kind.value!r}"
                )
            self._features[feature.name] = feature

    def features(self) -> list[FeatureId]:
        return sorted(self._features.values(), key=lambda f: f.name)

    # -- snapshot publication -----------------------------------------------

    @property
    def snapshot(self) -> CoverageSnapshot:
        return self._snapshot

    def _rollout_fraction(self, rollout: Rollout) -> float | None:
        """Published fraction for a rollout's features, or None if not published."""
        sched = rollout.policy.schedule
        if rollout.state is RolloutState.PENDING:
            return None
        if rollout.state is RolloutState.COMPLETED:
            return sched.target_coverage
        if rollout.state is RolloutState.ROLLED_BACK:
            return self._restore_coverage.get(rollout.id, sched.initial_coverage)
        return effective_coverage(sched, self.day, rollout.paused_days_accumulated)

    def _publish(self) -> CoverageSnapshot:
        entries: dict[str, tuple[ScheduleMode, float]] = {}
        for rollout in self._rollouts.values():
            fraction = self._rollout_fraction(rollout)
            if fraction is None:
                continue
            for feature in rollout.policy.features:
                entries[feature.name] = (rollout.policy.schedule.mode, fraction)
        self._snapshot = CoverageSnapshot(
            entries=entries, version=self._snapshot.version + 1
        )
        return self._snapshot

    # -- rollout lifecycle --------------------------------------------------

    def rollouts(self) -> list[Rollout]:
        return list(self._rollouts.values())

    def get_rollout(self, rollout_id: str) -> Rollout:
        rollout = self._rollouts.get(rollout_id)
        if rollout is None:
            raise UnknownRolloutError(f"no rollout with id {rollout_id!r}")
        return rollout

    def current_coverage(self, rollout_id: str) -> float | None:
        """Published fraction for a rollout today; None while Pending."""
        with self._lock:
            return self._rollout_fraction(self.get_rollout(rollout_id))

    def _validate_policy(self, policy: RolloutPolicy) -> None:
        for feature in policy.features:
            registered = self._features.get(feature.name)
            if registered is None:
                raise UnknownFeatureError(f"unknown feature {feature.name!r}")
            if registered.kind is not feature.kind:
                raise InvalidScheduleError(
                    f"feature {feature.name!r} is registered as "
                    f"{registered.kind.value!r}, policy says {feature.kind.value!r}"
                )
            if (
                policy.schedule.mode is ScheduleMode.DISTRIBUTION
                and registered.kind is FeatureKind.SPARSE_ID
            ):
                raise InvalidScheduleError(
                    f"distribution mode cannot apply to sparse-id feature "
                    f"{feature.name!r}"
                )
            for other in self._rollouts.values():
                if other.is_terminal:
                    continue
                if feature.name in other.policy.feature_names():
                    raise FeatureConflictError(
                        f"feature {feature.name!r} is already under rollout "
                        f"{other.id!r}"
                    )
        if policy.schedule.rate_per_day > 0:
            ramp_days = completion_day(policy.schedule) - policy.schedule.start_day
            if ramp_days > policy.max_duration_days:
                raise InvalidScheduleError(
                    f"ramp takes {ramp_days} days, exceeding max_duration_days="
                    f"{policy.max_duration_days}"
                )

    def create_rollout(self, policy: RolloutPolicy, rollout_id: str | None = None) -> Rollout:
        with self._lock:
            self._validate_policy(policy)
            if rollout_id is None:
                rollout_id = f"ro-{next(self._ids):04d}"
            elif rollout_id in self._rollouts:
                raise FeatureConflictError(f"rollout id {rollout_id!r} already exists")
            rollout = Rollout(
                id=rollout_id,
                policy=policy,
                state=RolloutState.PENDING,
                created_day=self.day,
                history=[HistoryEntry(self.day, "created", "operator")],
            )
            self._rollouts[rollout_id] = rollout
            self._restore_coverage[rollout_id] = policy.schedule.initial_coverage
            self._publish()
            return rollout

    def _transition(self, rollout: Rollout, to: RolloutState, reason: str) -> None:
        if to not in LEGAL_TRANSITIONS[rollout.state]:
            raise IllegalTransitionError(
                f"rollout {rollout.id!r}: {rollout.state.value} -> {to.value}"
            )
        entry = HistoryEntry(self.day, f"{rollout.state.value}->{to.value}", reason)
        rollout.state = to
        rollout.history.append(entry)

    def advance_day(self) -> CoverageSnapshot:
        """Tick the clock: activate, accumulate pauses, complete, republish."""
        with self._lock:
            self.day += 1
            for rollout in self._rollouts.values():
                sched = rollout.policy.schedule
                if (
                    rollout.state is RolloutState.PENDING
                    and sched.start_day <= self.day
                ):
                    self._transition(rollout, RolloutState.ACTIVE, "schedule")
                elif rollout.state is RolloutState.PAUSED:
                    rollout.paused_days_accumulated += 1
                if rollout.state is RolloutState.ACTIVE and sched.rate_per_day > 0:
                    coverage = effective_coverage(
                        sched, self.day, rollout.paused_days_accumulated
                    )
                    if coverage == sched.target_coverage:
                        self._transition(rollout, RolloutState.COMPLETED, "schedule")
            return self._publish()

    def pause(self, rollout_id: str, reason: str = "operator") -> Rollout:
        with self._lock:
            rollout = self.get_rollout(rollout_id)
            if rollout.state is not RolloutState.ACTIVE:
                raise IllegalTransitionError(
                    f"pause requires an Active rollout, {rollout.id!r} is "
                    f"{rollout.state.value}"
                )
            self._transition(rollout, RolloutState.PAUSED, reason)
            self._publish()
            return rollout

    def resume(self, rollout_id: str, reason: str = "operator") -> Rollout:
        with self._lock:
            rollout = self.get_rollout(rollout_id)
            if rollout.state is not RolloutState.PAUSED:
                raise IllegalTransitionError(
                    f"resume requires a Paused rollout, {rollout.id!r} is "
                    f"{rollout.state.value}"
                )
            self._transition(rollout, RolloutState.ACTIVE, reason)
            self._publish()
            return rollout

    def rollback(self, rollout_id: str, reason: str = "operator") -> Rollout:
        """Terminal: the next snapshot restores the schedule's initial coverage."""
        with self._lock:
            rollout = self.get_rollout(rollout_id)
            self._transition(rollout, RolloutState.ROLLED_BACK, reason)
            self._publish()
            return rollout

    def adjust_rate(self, rollout_id: str, rate_per_day: float) -> Rollout:
        """Change rate_per_day of a Pending or Paused rollout.

        A Paused rollout is rebased: the schedule restarts from its current
        coverage at the current day, so the coverage curve stays continuous
        and remains reconstructable from (schedule, day). Active rollouts
        must be paused first.
        """
        with self._lock:
            rollout = self.get_rollout(rollout_id)
            old = rollout.policy.schedule
            if rollout.state is RolloutState.PENDING:
                new_sched = type(old)(
                    start_day=old.start_day,
                    rate_per_day=rate_per_day,
                    initial_coverage=old.initial_coverage,
                    target_coverage=old.target_coverage,
                    mode=old.mode,
                )
            elif rollout.state is RolloutState.PAUSED:
                frozen = effective_coverage(
                    old, self.day, rollout.paused_days_accumulated
                )
                new_sched = type(old)(
                    start_day=self.day,
                    rate_per_day=rate_per_day,
                    initial_coverage=frozen,
                    target_coverage=old.target_coverage,
                    mode=old.mode,
                )
                rollout.paused_days_accumulated = 0
            else:
                raise IllegalTransitionError(
                    f"rollout {rollout.id!r} is {rollout.state.value}; "
                    "pause it before adjusting the rate"
                )
            policy = rollout.policy
            rollout.policy = type(policy)(
                features=policy.features,
                schedule=new_sched,
                max_daily_ne_increase=policy.max_daily_ne_increase,
                max_cumulative_ne_increase=policy.max_cumulative_ne_increase,
                max_duration_days=policy.max_duration_days,
            )
            rollout.history.append(
                HistoryEntry(self.day, "rate-adjusted", f"rate={rate_per_day!r}")
            )
            self._publish()
            return rollout

    # -- guardrails ----------------------------------------------------------

    def apply_guardrails(self, history: Sequence[MetricPoint]) -> Verdict:
        """Evaluate every watchable rollout against the metric history and
        execute the worst verdict. Returns that verdict."""
        with self._lock:
            worst = Verdict.OK
            for rollout in list(self._rollouts.values()):
                if rollout.state not in (RolloutState.ACTIVE, RolloutState.PAUSED):
                    continue
                start = rollout.activation_day()
                if start is None:
                    continue
                config = GuardrailConfig(
                    max_daily_ne_increase=rollout.policy.max_daily_ne_increase,
                    max_cumulative_ne_increase=rollout.policy.max_cumulative_ne_increase,
                    baseline_window_days=self.guardrail.baseline_window_days,
                    action_on_daily_breach=self.guardrail.action_on_daily_breach,
                    action_on_cumulative_breach=self.guardrail.action_on_cumulative_breach,
                )
                try:
                    verdict = evaluate(config, history, start)
                except InsufficientHistoryError:
                    # not enough pre-rollout days to form a baseline; the
                    # guardrail is not armed yet for this rollout
                    continue
                if verdict is Verdict.ROLLBACK:
                    self.rollback(rollout.id, reason="guardrail")
                    worst = Verdict.ROLLBACK
                elif verdict is Verdict.PAUSE and rollout.state is RolloutState.ACTIVE:
                    self.pause(rollout.id, reason="guardrail")
                    if worst is Verdict.OK:
                        worst = Verdict.PAUSE
            return worst

    # -- state dump (golden-test format) --------------------------------------

    def dump_state(self) -> dict:
        with self._lock:
            return {
                "day": self.day,
                "features": [f.to_dict() for f in self.features()],
                "rollouts": [r.to_dict() for r in self._rollouts.values()],
                "restore_coverages": dict(sorted(self._restore_coverage.items())),
                "snapshot": self._snapshot.to_dict(),
                "guardrail": self.guardrail.to_dict(),
            }
