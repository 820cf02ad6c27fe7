/** Fixture-replay contract: every chart value is traceable to a /v1/metrics
 * payload value — the console computes nothing of its own. */

import { readFileSync } from "node:fs";
import path from "node:path";
import { describe, expect, it } from "vitest";

import {
  coverageSeries,
  eventMarkers,
  neSeries,
  smoothed,
} from "../src/chartData.js";
import type { Envelope, Metrics, RolloutList } from "../src/types.js";

function fixture<T>(name: string): T {
  const raw = readFileSync(
    path.join(__dirname, "fixtures", `${name}.json`),
    "utf-8",
  );
  return JSON.parse(raw) as T;
}

const metricsFixture = fixture<Envelope<Metrics>>("metrics_mid_fade");
const rolloutsFixture = fixture<Envelope<RolloutList>>("rollouts_mid_fade");

describe("neSeries", () => {
  it("maps every chart point to exactly the payload values", () => {
    const points = metricsFixture.payload.points;
    const series = neSeries(points);
    expect(series.days.length).toBe(points.length);
    for (let i = 0; i < points.length; i++) {
      expect(series.days[i]).toBe(points[i]!.day);
      expect(series.ne[i]).toBe(points[i]!.ne);
    }
  });
});

describe("coverageSeries", () => {
  it("reproduces the snapshot values for each faded feature", () => {
    const points = metricsFixture.payload.points;
    const curves = coverageSeries(points);
    expect(curves.map((c) => c.feature)).toEqual([
      "sparse_00",
      "sparse_01",
      "sparse_02",
      "sparse_03",
      "sparse_04",
    ]);
    for (const curve of curves) {
      for (let i = 0; i < curve.days.length; i++) {
        const point = points.find((p) => p.day === curve.days[i]);
        expect(point).toBeDefined();
        expect(curve.coverage[i]).toBe(
          point!.coverage_snapshot[curve.feature],
        );
      }
    }
  });

  it("skips days where a feature is not under rollout", () => {
    const points = metricsFixture.payload.points;
    const curve = coverageSeries(points)[0]!;
    const snapshotDays = points
      .filter((p) => curve.feature in p.coverage_snapshot)
      .map((p) => p.day);
    expect(curve.days).toEqual(snapshotDays);
  });
});

describe("eventMarkers", () => {
  it("marks the rollout activation day from server history", () => {
    const markers = eventMarkers(
      metricsFixture.payload.points,
      rolloutsFixture.payload.rollouts,
    );
    const start = markers.find((m) => m.kind === "rollout-start");
    expect(start).toBeDefined();
    const activation = rolloutsFixture.payload.rollouts[0]!.history.find((h) =>
      h.transition.endsWith("->Active"),
    );
    expect(start!.day).toBe(activation!.day);
  });

  it("marks guardrail verdict days", () => {
    const points = [
      ...metricsFixture.payload.points.slice(0, 3),
      {
        ...metricsFixture.payload.points[3]!,
        guardrail_verdict: "rolled_back" as const,
      },
    ];
    const markers = eventMarkers(points, []);
    expect(markers).toEqual([
      {
        day: points[3]!.day,
        kind: "guardrail-rollback",
        label: "rolled back",
      },
    ]);
  });
});

describe("smoothed", () => {
  it("is the identity at window 1 and never alters the source", () => {
    const values = metricsFixture.payload.points.map((p) => p.ne);
    const copy = [...values];
    expect(smoothed(values, 1)).toEqual(copy);
    smoothed(values, 5);
    expect(values).toEqual(copy);
  });

  it("averages trailing windows", () => {
    expect(smoothed([1, 2, 3, 4], 2)).toEqual([1, 1.5, 2.5, 3.5]);
  });
});
