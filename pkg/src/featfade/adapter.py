"""Serving-time feature adapter: applies fading decisions to feature maps.

The adapter is stateless and pure; a request handler reads one immutable
CoverageSnapshot for the whole request, and the exact values it produces are
what gets served AND logged for recurring training.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .domain import Example, LoggedExample, ScheduleMode
from .errors import InvalidScheduleError
from .gating import gate_decision


@dataclass(frozen=True)
class CoverageSnapshot:
    """Immutable feature -> (mode, fraction) map published by the control plane.

    `fraction` is the keep probability for coverage mode and the value scale
    for distribution mode. Features absent from the map are untouched.
    """

    entries: Mapping[str, tuple[ScheduleMode, float]] = field(default_factory=dict)
    version: int = 0

    def coverages(self) -> dict[str, float]:
        """Plain name -> fraction view (mode dropped)."""
        return {name: frac for name, (_, frac) in self.entries.items()}

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "entries": {
                name: {"mode": mode.value, "fraction": frac}
                for name, (mode, frac) in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CoverageSnapshot":
        return cls(
            entries={
                name: (ScheduleMode(e["mode"]), float(e["fraction"]))
                for name, e in d["entries"].items()
            },
            version=int(d["version"]),
        )


def _scale_value(name: str, value, scale: float):
    if isinstance(value, tuple):
        return tuple(v * scale for v in value)
    if isinstance(value, float):
        return value * scale
    raise InvalidScheduleError(
        f"distribution mode cannot scale sparse-id feature {name!r}"
    )


def apply_fading(example: Example, snapshot: CoverageSnapshot) -> LoggedExample:
    """Produce the post-fading view of an example under a snapshot.

    Coverage-mode features are dropped when the gate says so; distribution-
    mode features have every numeric value multiplied by the effective scale;
    untouched features pass through bit-identically. Pure and deterministic.
    """
    faded: dict = {}
    for name in sorted(example.features):
        value = example.features[name]
        entry = snapshot.entries.get(name)
        if entry is None:
            faded[name] = value
            continue
        mode, fraction = entry
        if mode is ScheduleMode.COVERAGE:
            if gate_decision(name, example.request_id, fraction):
                faded[name] = value
        else:
            faded[name] = _scale_value(name, value, fraction)
    return LoggedExample(
        request_id=example.request_id,
        features=faded,
        label=example.label,
        day=example.day,
        effective_coverage_snapshot=snapshot.coverages(),
    )
