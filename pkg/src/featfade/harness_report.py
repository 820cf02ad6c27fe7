"""Run reports: per-day metric series, damage summaries, phase tables, and
paired run comparisons.

The summary treats NE damage as excess over the pre-rollout baseline (the
trailing mean the guardrails also use). `cumulative_delta_ne` integrates that
excess from the first post-activation day to the end of the series, and the
phase table partitions the same integral over the coverage bands the rollout
traverses (90-70, 70-40, 40-10, 10-0 percent), so the band sums are directly
comparable between a gradual fade and an abrupt zero-out over the same days.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Mapping, Sequence

from .domain import MetricPoint, Rollout, to_json
from .errors import MismatchedHorizonError
from .world import WorldConfig

if TYPE_CHECKING:  # pragma: no cover
    from .harness import ScenarioConfig

#: Coverage bands of the phase table, outer edge first: (high, low].
#: The last band is closed at zero so the completion day lands in it.
PHASE_BANDS: tuple[tuple[float, float], ...] = (
    (0.9, 0.7),
    (0.7, 0.4),
    (0.4, 0.1),
    (0.1, 0.0),
)

BASELINE_WINDOW_DAYS = 5
RECOVERY_EPSILON_FRACTION = 0.1
STEADY_STATE_WINDOW_DAYS = 5


def band_label(high: float, low: float) -> str:
    return f"{round(high * 100)}-{round(low * 100)}"


def band_of(coverage: float) -> tuple[float, float] | None:
    for high, low in PHASE_BANDS:
        if low < coverage <= high or (low == 0.0 and coverage == 0.0):
            return (high, low)
    return None


@dataclass(frozen=True)
class PhaseRow:
    """Damage attributed to one coverage band of a rollout."""

    band_high: float
    band_low: float
    n_days: int
    excess_ne_sum: float
    mean_coverage: float

    @property
    def label(self) -> str:
        return band_label(self.band_high, self.band_low)

    def to_dict(self) -> dict[str, Any]:
        return {
            "band": self.label,
            "band_high": self.band_high,
            "band_low": self.band_low,
            "n_days": self.n_days,
            "excess_ne_sum": self.excess_ne_sum,
            "mean_coverage": self.mean_coverage,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PhaseRow":
        return cls(
            band_high=float(d["band_high"]),
            band_low=float(d["band_low"]),
            n_days=int(d["n_days"]),
            excess_ne_sum=float(d["excess_ne_sum"]),
            mean_coverage=float(d["mean_coverage"]),
        )


@dataclass(frozen=True)
class RunSummary:
    """Headline damage statistics, all recomputable from the series."""

    baseline_ne: float | None
    peak_daily_delta_ne: float | None
    cumulative_delta_ne: float | None
    spike_day: int | None
    spike_ne: float | None
    steady_state_ne: float | None
    recovery_days: int | None
    phase_table: tuple[PhaseRow, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "baseline_ne": self.baseline_ne,
            "peak_daily_delta_ne": self.peak_daily_delta_ne,
            "cumulative_delta_ne": self.cumulative_delta_ne,
            "spike_day": self.spike_day,
            "spike_ne": self.spike_ne,
            "steady_state_ne": self.steady_state_ne,
            "recovery_days": self.recovery_days,
            "phase_table": [row.to_dict() for row in self.phase_table],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunSummary":
        def opt(key):
            return None if d.get(key) is None else d[key]

        return cls(
            baseline_ne=opt("baseline_ne"),
            peak_daily_delta_ne=opt("peak_daily_delta_ne"),
            cumulative_delta_ne=opt("cumulative_delta_ne"),
            spike_day=None if d.get("spike_day") is None else int(d["spike_day"]),
            spike_ne=opt("spike_ne"),
            steady_state_ne=opt("steady_state_ne"),
            recovery_days=None if d.get("recovery_days") is None else int(d["recovery_days"]),
            phase_table=tuple(PhaseRow.from_dict(r) for r in d.get("phase_table", [])),
        )


def rollout_coverage(point: MetricPoint, feature_names: Sequence[str]) -> float | None:
    """Mean published coverage across the rollout's features on that day."""
    values = [
        point.coverage_snapshot[name]
        for name in feature_names
        if name in point.coverage_snapshot
    ]
    if not values:
        return None
    return sum(values) / len(values)


def summarize(
    series: Sequence[MetricPoint],
    activation_day: int | None,
    rollout_features: Sequence[str],
    terminal_day: int | None,
) -> RunSummary:
    """Compute the damage summary for one run; all-None for baselines."""
    if activation_day is None:
        return RunSummary(None, None, None, None, None, None, None, ())

    by_day = {p.day: p for p in series}
    pre = [p.ne for p in series if p.day < activation_day]
    if len(pre) < BASELINE_WINDOW_DAYS:
        return RunSummary(None, None, None, None, None, None, None, ())
    baseline = sum(pre[-BASELINE_WINDOW_DAYS:]) / BASELINE_WINDOW_DAYS

    post = [p for p in series if p.day >= activation_day + 1]
    if not post:
        return RunSummary(baseline, None, None, None, None, None, None, ())

    peak_daily = max(
        p.ne - by_day[p.day - 1].ne for p in post if p.day - 1 in by_day
    )
    cumulative = sum(p.ne - baseline for p in post)

    spike_point = max(post, key=lambda p: p.ne)
    steady_window = [p.ne for p in series[-STEADY_STATE_WINDOW_DAYS:]]
    steady = sum(steady_window) / len(steady_window)

    recovery: int | None
    if spike_point.ne <= steady:
        recovery = 0
    else:
        threshold = steady + RECOVERY_EPSILON_FRACTION * (spike_point.ne - steady)
        recovery = series[-1].day - spike_point.day  # lower bound if never recovered
        for p in post:
            if p.day > spike_point.day and p.ne <= threshold:
                recovery = p.day - spike_point.day
                break

    rows: list[PhaseRow] = []
    last_banded_day = terminal_day if terminal_day is not None else series[-1].day
    for high, low in PHASE_BANDS:
        days: list[MetricPoint] = []
        coverages: list[float] = []
        for p in post:
            if p.day > last_banded_day:
                continue
            cov = rollout_coverage(p, rollout_features)
            if cov is None or band_of(cov) != (high, low):
                continue
            days.append(p)
            coverages.append(cov)
        if days:
            rows.append(
                PhaseRow(
                    band_high=high,
                    band_low=low,
                    n_days=len(days),
                    excess_ne_sum=float(sum(p.ne - baseline for p in days)),
                    mean_coverage=float(sum(coverages) / len(coverages)),
                )
            )

    return RunSummary(
        baseline_ne=float(baseline),
        peak_daily_delta_ne=float(peak_daily),
        cumulative_delta_ne=float(cumulative),
        spike_day=spike_point.day,
        spike_ne=float(spike_point.ne),
        steady_state_ne=float(steady),
        recovery_days=recovery,
        phase_table=tuple(rows),
    )


@dataclass(frozen=True)
class RunReport:
    """Everything one scenario execution produced."""

    world: WorldConfig
    scenario_name: str
    scenario_kind: str
    rollout_features: tuple[str, ...]
    activation_day: int | None
    terminal_day: int | None
    aborted: bool
    series: tuple[MetricPoint, ...]
    summary: RunSummary

    @classmethod
    def assemble(
        cls,
        world: WorldConfig,
        scenario: "ScenarioConfig",
        series: tuple[MetricPoint, ...],
        rollouts: Sequence[Rollout],
        aborted: bool = False,
    ) -> "RunReport":
        features = sorted({n for r in rollouts for n in r.policy.feature_names()})
        activations = [d for r in rollouts if (d := r.activation_day()) is not None]
        activation = min(activations) if activations else None
        terminal_days = [
            entry.day
            for r in rollouts
            for entry in r.history
            if entry.transition.endswith("->Completed")
            or entry.transition.endswith("->RolledBack")
        ]
        terminal = max(terminal_days) if terminal_days else None
        return cls(
            world=world,
            scenario_name=scenario.name,
            scenario_kind=scenario.kind.value,
            rollout_features=tuple(features),
            activation_day=activation,
            terminal_day=terminal,
            aborted=aborted,
            series=series,
            summary=summarize(series, activation, features, terminal),
        )

    def recomputed_summary(self) -> RunSummary:
        return summarize(
            self.series, self.activation_day, self.rollout_features, self.terminal_day
        )

    # -- exports -----------------------------------------------------------------

    def csv_text(self) -> str:
        """Per-day CSV: day,ne,mean_prediction,mean_label,coverage_<f>...,verdict."""
        out = io.StringIO()
        coverage_cols = list(self.rollout_features)
        header = ["day", "ne", "mean_prediction", "mean_label"]
        header += [f"coverage_{name}" for name in coverage_cols]
        header.append("verdict")
        out.write(",".join(header) + "\n")
        for p in self.series:
            row = [str(p.day), repr(p.ne), repr(p.mean_prediction), repr(p.mean_label)]
            for name in coverage_cols:
                cov = p.coverage_snapshot.get(name)
                row.append("" if cov is None else repr(cov))
            row.append(p.guardrail_verdict.value)
            out.write(",".join(row) + "\n")
        return out.getvalue()

    def summary_json(self) -> str:
        return to_json(
            {
                "scenario": self.scenario_name,
                "kind": self.scenario_kind,
                "seed": self.world.seed,
                "rollout_features": list(self.rollout_features),
                "activation_day": self.activation_day,
                "terminal_day": self.terminal_day,
                "aborted": self.aborted,
                "summary": self.summary.to_dict(),
            }
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": 1,
            "world": self.world.to_dict(),
            "scenario_name": self.scenario_name,
            "scenario_kind": self.scenario_kind,
            "rollout_features": list(self.rollout_features),
            "activation_day": self.activation_day,
            "terminal_day": self.terminal_day,
            "aborted": self.aborted,
            "series": [p.to_dict() for p in self.series],
            "summary": self.summary.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunReport":
        return cls(
            world=WorldConfig.from_dict(d["world"]),
            scenario_name=d["scenario_name"],
            scenario_kind=d["scenario_kind"],
            rollout_features=tuple(d["rollout_features"]),
            activation_day=d["activation_day"],
            terminal_day=d["terminal_day"],
            aborted=bool(d["aborted"]),
            series=tuple(MetricPoint.from_dict(p) for p in d["series"]),
            summary=RunSummary.from_dict(d["summary"]),
        )


@dataclass(frozen=True)
class ComparisonPhaseRow:
    """One band of the paired phase table; delta > 0 means run a did worse."""

    band_high: float
    band_low: float
    n_days: int
    a_excess_ne_sum: float
    b_excess_ne_sum: float

    @property
    def label(self) -> str:
        return band_label(self.band_high, self.band_low)

    @property
    def delta(self) -> float:
        return self.a_excess_ne_sum - self.b_excess_ne_sum

    def to_dict(self) -> dict[str, Any]:
        return {
            "band": self.label,
            "band_high": self.band_high,
            "band_low": self.band_low,
            "n_days": self.n_days,
            "a_excess_ne_sum": self.a_excess_ne_sum,
            "b_excess_ne_sum": self.b_excess_ne_sum,
            "delta": self.delta,
        }


@dataclass(frozen=True)
class RunComparison:
    """Paired deltas of run a against reference run b (b normalized to 100%)."""

    a_name: str
    b_name: str
    daily_ne_delta: tuple[float, ...]
    max_abs_daily_ne_delta: float
    peak_ratio_pct: float | None
    cumulative_ratio_pct: float | None
    recovery_ratio_pct: float | None
    phase_table: tuple[ComparisonPhaseRow, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "a": self.a_name,
            "b": self.b_name,
            "max_abs_daily_ne_delta": self.max_abs_daily_ne_delta,
            "peak_ratio_pct": self.peak_ratio_pct,
            "cumulative_ratio_pct": self.cumulative_ratio_pct,
            "recovery_ratio_pct": self.recovery_ratio_pct,
            "phase_table": [row.to_dict() for row in self.phase_table],
            "daily_ne_delta": list(self.daily_ne_delta),
        }


def _ratio_pct(a: float | None, b: float | None) -> float | None:
    if a is None or b is None or b == 0:
        return None
    return 100.0 * a / b


def compare_runs(a: RunReport, b: RunReport) -> RunComparison:
    """Pair run a against reference run b day by day.

    The phase table re-aggregates both runs' excess NE over the coverage
    bands of b's ramp (the reference trajectory), so the zero-out run's
    damage is attributed to the phases of the fade it is being compared to.
    """
    if [p.day for p in a.series] != [p.day for p in b.series]:
        raise MismatchedHorizonError(
            f"series horizons differ: {len(a.series)} vs {len(b.series)} days"
        )
    deltas = tuple(pa.ne - pb.ne for pa, pb in zip(a.series, b.series))
    max_abs = max((abs(d) for d in deltas), default=0.0)

    phase_rows: list[ComparisonPhaseRow] = []
    if (
        b.activation_day is not None
        and a.summary.baseline_ne is not None
        and b.summary.baseline_ne is not None
    ):
        a_by_day = {p.day: p for p in a.series}
        last_banded = b.terminal_day if b.terminal_day is not None else b.series[-1].day
        for high, low in PHASE_BANDS:
            days = []
            for pb in b.series:
                if pb.day <= b.activation_day or pb.day > last_banded:
                    continue
                cov = rollout_coverage(pb, b.rollout_features)
                if cov is None or band_of(cov) != (high, low):
                    continue
                days.append(pb.day)
            if not days:
                continue
            a_sum = sum(a_by_day[d].ne - a.summary.baseline_ne for d in days)
            b_sum = sum(
                next(p for p in b.series if p.day == d).ne - b.summary.baseline_ne
                for d in days
            )
            phase_rows.append(
                ComparisonPhaseRow(
                    band_high=high,
                    band_low=low,
                    n_days=len(days),
                    a_excess_ne_sum=float(a_sum),
                    b_excess_ne_sum=float(b_sum),
                )
            )

    return RunComparison(
        a_name=a.scenario_name,
        b_name=b.scenario_name,
        daily_ne_delta=deltas,
        max_abs_daily_ne_delta=float(max_abs),
        peak_ratio_pct=_ratio_pct(
            a.summary.peak_daily_delta_ne, b.summary.peak_daily_delta_ne
        ),
        cumulative_ratio_pct=_ratio_pct(
            a.summary.cumulative_delta_ne, b.summary.cumulative_delta_ne
        ),
        recovery_ratio_pct=_ratio_pct(
            None if a.summary.recovery_days is None else float(a.summary.recovery_days),
            None if b.summary.recovery_days is None else float(b.summary.recovery_days),
        ),
        phase_table=tuple(phase_rows),
    )
