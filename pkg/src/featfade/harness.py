"""Scenario harness: the serve -> log -> train day loop, run reports, and
paired zero-out vs fading comparisons.

A scenario is a set of rollout policies over the shared synthetic world. Each
simulated day the session publishes the control-plane snapshot, fades the
day's traffic with it, serves predictions, trains on exactly the values it
served (training-serving consistency is asserted structurally every day),
evaluates normalized entropy on a faded holdout, and feeds the guardrails.
Everything is a deterministic function of (world seed, scenario).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .adapter import apply_fading
from .control_plane import ControlPlane
from .domain import (
    FeatureId,
    GuardrailVerdict,
    MetricPoint,
    RolloutPolicy,
    parse_json,
)
from .errors import ConfigError
from .guardrail import GuardrailConfig, Verdict
from .harness_report import (  # re-exported for package users
    PHASE_BANDS,
    PhaseRow,
    RunComparison,
    RunReport,
    RunSummary,
    compare_runs,
)
from .trainer import ModelState, ne_from_arrays
from .world import World, WorldConfig

__all__ = [
    "ScenarioConfig",
    "ScenarioKind",
    "SimulationSession",
    "run_scenario",
    "compare_runs",
    "load_preset",
    "list_presets",
    "scenario_from_dict",
    "RunReport",
    "RunSummary",
    "RunComparison",
    "PhaseRow",
    "PHASE_BANDS",
    "DEFAULT_NE_NOISE_BAND",
]

# 3x the pooled std (0.00888) of day-over-day NE deltas across 10 baseline
# seeds of the shipped default world; see scripts/calibrate_noise_band.py.
DEFAULT_NE_NOISE_BAND = 0.027


class ScenarioKind(str, Enum):
    BASELINE = "baseline"
    FADING = "fading"
    ZERO_OUT = "zero-out"


@dataclass(frozen=True)
class ScenarioConfig:
    """Named set of rollout policies plus warmup and optional fault injection.

    A zero-out scenario is expressed as a degenerate schedule (rate 1.0,
    target 0.0): coverage steps from full to nothing across one day.
    """

    name: str
    kind: ScenarioKind = ScenarioKind.BASELINE
    policies: tuple[RolloutPolicy, ...] = ()
    warmup_days: int = 15
    injected_ne_step: tuple[int, float] | None = None

    def __post_init__(self):
        if self.warmup_days < 0:
            raise ValueError("warmup_days must be >= 0")
        if self.kind is ScenarioKind.ZERO_OUT:
            for policy in self.policies:
                sched = policy.schedule
                if sched.rate_per_day != 1.0 or sched.target_coverage != 0.0:
                    raise ValueError(
                        "zero-out scenarios require rate_per_day=1.0 and "
                        "target_coverage=0.0"
                    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "warmup_days": self.warmup_days,
            "injected_ne_step": (
                None
                if self.injected_ne_step is None
                else {"day": self.injected_ne_step[0], "delta": self.injected_ne_step[1]}
            ),
            "policies": [p.to_dict() for p in self.policies],
        }


def scenario_from_dict(d: Mapping[str, Any], world: WorldConfig) -> ScenarioConfig:
    """Build a scenario from config JSON; bare feature names are resolved to
    their registered kind in the world."""
    policies = []
    for pd in d.get("policies", ()):
        features = []
        for f in pd["features"]:
            if isinstance(f, str):
                features.append(FeatureId(f, world.feature_kind(f)))
            else:
                features.append(FeatureId.from_dict(f))
        policies.append(
            RolloutPolicy.from_dict({**pd, "features": [f.to_dict() for f in features]})
        )
    step = d.get("injected_ne_step")
    return ScenarioConfig(
        name=d["name"],
        kind=ScenarioKind(d.get("kind", "baseline")),
        policies=tuple(policies),
        warmup_days=int(d.get("warmup_days", 15)),
        injected_ne_step=None if step is None else (int(step["day"]), float(step["delta"])),
    )


def list_presets() -> list[str]:
    root = resources.files("featfade").joinpath("presets")
    return sorted(p.name.removesuffix(".json") for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name_or_path: str, world: WorldConfig) -> ScenarioConfig:
    """Load a scenario by shipped preset name or by config file path."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return scenario_from_dict(parse_json(path.read_text(), str(path)), world)
    candidate = resources.files("featfade").joinpath(f"presets/{name_or_path}.json")
    if candidate.is_file():
        return scenario_from_dict(
            parse_json(candidate.read_text(), f"preset:{name_or_path}"), world
        )
    raise ConfigError(
        f"no such scenario preset or file: {name_or_path!r} "
        f"(shipped presets: {', '.join(list_presets())})"
    )


_VERDICT_TO_METRIC = {
    Verdict.OK: GuardrailVerdict.OK,
    Verdict.PAUSE: GuardrailVerdict.PAUSED,
    Verdict.ROLLBACK: GuardrailVerdict.ROLLED_BACK,
}


class SimulationSession:
    """Owns one world + control plane + model and advances them day by day.

    This is the single engine behind both the batch CLI and the HTTP
    service: a scenario executed through N service step calls produces the
    same metric series as one batch run.
    """

    def __init__(
        self,
        world_config: WorldConfig,
        guardrail: GuardrailConfig | None = None,
        injected_ne_step: tuple[int, float] | None = None,
    ):
        self.world = World(world_config)
        self.plane = ControlPlane(world_config.features(), guardrail)
        self.model = ModelState.initial(
            n_buckets=world_config.model_buckets,
            learning_rate=world_config.learning_rate,
        )
        self.metrics: list[MetricPoint] = []
        self.injected_ne_step = injected_ne_step

    @property
    def config(self) -> WorldConfig:
        return self.world.config

    def create_rollout(self, policy: RolloutPolicy, rollout_id: str | None = None):
        return self.plane.create_rollout(policy, rollout_id)

    def _assert_consistency(self, raw, served, snapshot) -> None:
        # the same faded value must feed serving, logging, and training
        n = len(served)
        for i in {0, n // 2, n - 1} if n else set():
            via_adapter = apply_fading(raw.example(i), snapshot)
            via_batch = served.logged_example(i)
            if via_adapter != via_batch:
                raise AssertionError(
                    f"training-serving consistency violated on day {served.day}, "
                    f"row {i}"
                )

    def step_day(self) -> MetricPoint:
        """Advance the clock one day and run the full pipeline for it."""
        snapshot = self.plane.advance_day()
        day = self.plane.day

        traffic = self.world.generate_day(day)
        served = traffic.apply_snapshot(snapshot)
        buckets, values, present = served.slot_arrays(self.world.tables)
        self.model.predict_arrays(buckets, values, present)  # serving pass
        self._assert_consistency(traffic, served, snapshot)
        # recurring training consumes the very arrays that served
        self.model.train_day_arrays(day, buckets, values, present, served.labels)

        holdout = self.world.generate_holdout(day).apply_snapshot(snapshot)
        hb, hv, hp = holdout.slot_arrays(self.world.tables)
        holdout_preds = self.model.predict_arrays(hb, hv, hp)
        ne = ne_from_arrays(holdout_preds, holdout.labels)
        if self.injected_ne_step is not None and day >= self.injected_ne_step[0]:
            ne += self.injected_ne_step[1]

        draft = MetricPoint(
            day=day,
            ne=float(ne),
            mean_prediction=float(holdout_preds.mean()),
            mean_label=float(holdout.labels.mean()),
            coverage_snapshot=snapshot.coverages(),
            guardrail_verdict=GuardrailVerdict.OK,
        )
        verdict = self.plane.apply_guardrails([*self.metrics, draft])
        point = MetricPoint(
            day=draft.day,
            ne=draft.ne,
            mean_prediction=draft.mean_prediction,
            mean_label=draft.mean_label,
            coverage_snapshot=draft.coverage_snapshot,
            guardrail_verdict=_VERDICT_TO_METRIC[verdict],
        )
        self.metrics.append(point)
        return point


def run_scenario(world_config: WorldConfig, scenario: ScenarioConfig) -> RunReport:
    """Execute a scenario start to finish; aborts with a report-so-far if a
    guardrail rolls the rollout back."""
    session = SimulationSession(
        world_config, injected_ne_step=scenario.injected_ne_step
    )
    for policy in scenario.policies:
        session.create_rollout(policy)
    aborted = False
    for _ in range(world_config.n_days):
        point = session.step_day()
        if point.guardrail_verdict is GuardrailVerdict.ROLLED_BACK:
            aborted = True
            break
    return RunReport.assemble(
        world=world_config,
        scenario=scenario,
        series=tuple(session.metrics),
        rollouts=session.plane.rollouts(),
        aborted=aborted,
    )
