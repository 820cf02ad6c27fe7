/** Pure derivations from metric payloads to chart-ready series and markers.
 * No fetching, no DOM: this module is what the fixture-replay contract test
 * exercises — every chart value must equal a /v1/metrics payload value.
 */

import type { MetricPoint, Rollout } from "./types.js";

export interface NeSeries {
  days: number[];
  ne: number[];
}

export interface CoverageSeries {
  feature: string;
  days: number[];
  coverage: number[];
}

export interface EventMarker {
  day: number;
  kind: "rollout-start" | "guardrail-pause" | "guardrail-rollback";
  label: string;
}

export function neSeries(points: MetricPoint[]): NeSeries {
  return {
    days: points.map((p) => p.day),
    ne: points.map((p) => p.ne),
  };
}

/** One coverage curve per feature that ever appeared in a snapshot. */
export function coverageSeries(points: MetricPoint[]): CoverageSeries[] {
  const features = new Set<string>();
  for (const p of points) {
    for (const name of Object.keys(p.coverage_snapshot)) features.add(name);
  }
  return [...features].sort().map((feature) => {
    const days: number[] = [];
    const coverage: number[] = [];
    for (const p of points) {
      const value = p.coverage_snapshot[feature];
      if (value !== undefined) {
        days.push(p.day);
        coverage.push(value);
      }
    }
    return { feature, days, coverage };
  });
}

/** Markers for rollout starts and guardrail verdict days. */
export function eventMarkers(
  points: MetricPoint[],
  rollouts: Rollout[],
): EventMarker[] {
  const markers: EventMarker[] = [];
  for (const r of rollouts) {
    const activation = r.history.find((h) => h.transition.endsWith("->Active"));
    if (activation) {
      markers.push({
        day: activation.day,
        kind: "rollout-start",
        label: `${r.id} start`,
      });
    }
  }
  for (const p of points) {
    if (p.guardrail_verdict === "paused") {
      markers.push({ day: p.day, kind: "guardrail-pause", label: "paused" });
    } else if (p.guardrail_verdict === "rolled_back") {
      markers.push({
        day: p.day,
        kind: "guardrail-rollback",
        label: "rolled back",
      });
    }
  }
  return markers.sort((a, b) => a.day - b.day);
}

/** Moving average for the display-only smoothing toggle; never applied to
 * exported or polled data. */
export function smoothed(values: number[], window: number): number[] {
  if (window <= 1) return [...values];
  const out: number[] = [];
  for (let i = 0; i < values.length; i++) {
    const lo = Math.max(0, i - window + 1);
    let sum = 0;
    for (let j = lo; j <= i; j++) sum += values[j]!;
    out.push(sum / (i - lo + 1));
  }
  return out;
}
