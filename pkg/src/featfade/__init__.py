"""featfade: elastic feature-fading rollouts with a deterministic simulator.

A control plane owns rollout policies and publishes per-day coverage
snapshots; a stateless serving adapter applies them with deterministic nested
gating; a hashed logistic model retrains daily on the exact values served;
guardrails pause or roll back rollouts on NE regressions. The harness runs
seeded scenarios and compares gradual fading against abrupt zero-out.
"""

from .adapter import CoverageSnapshot, apply_fading
from .control_plane import ControlPlane
from .domain import (
    Example,
    FadingSchedule,
    FeatureId,
    FeatureKind,
    GuardrailVerdict,
    LoggedExample,
    MetricPoint,
    Rollout,
    RolloutPolicy,
    RolloutState,
    ScheduleMode,
)
from .gating import gate_decision, unit_interval_hash
from .guardrail import GuardrailAction, GuardrailConfig, Verdict, evaluate
from .harness import (
    DEFAULT_NE_NOISE_BAND,
    RunComparison,
    RunReport,
    ScenarioConfig,
    ScenarioKind,
    SimulationSession,
    compare_runs,
    list_presets,
    load_preset,
    run_scenario,
)
from .schedule import CoverageCurve, completion_day, effective_coverage, effective_scale
from .trainer import ModelState, ne_from_arrays, normalized_entropy
from .world import World, WorldConfig

__version__ = "0.1.0"

__all__ = [
    "CoverageSnapshot",
    "apply_fading",
    "ControlPlane",
    "Example",
    "FadingSchedule",
    "FeatureId",
    "FeatureKind",
    "GuardrailVerdict",
    "LoggedExample",
    "MetricPoint",
    "Rollout",
    "RolloutPolicy",
    "RolloutState",
    "ScheduleMode",
    "gate_decision",
    "unit_interval_hash",
    "GuardrailAction",
    "GuardrailConfig",
    "Verdict",
    "evaluate",
    "DEFAULT_NE_NOISE_BAND",
    "RunComparison",
    "RunReport",
    "ScenarioConfig",
    "ScenarioKind",
    "SimulationSession",
    "compare_runs",
    "list_presets",
    "load_preset",
    "run_scenario",
    "CoverageCurve",
    "completion_day",
    "effective_coverage",
    "effective_scale",
    "ModelState",
    "ne_from_arrays",
    "normalized_entropy",
    "World",
    "WorldConfig",
    "__version__",
]
