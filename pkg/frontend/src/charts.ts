/** uPlot wiring for the NE timeseries and per-feature coverage curves.
 * Chart data comes exclusively from chartData derivations of /v1/metrics
 * payloads; the smoothing toggle affects display only. */

import uPlot from "uplot";

import {
  coverageSeries,
  eventMarkers,
  neSeries,
  smoothed,
  type EventMarker,
} from "./chartData.js";
import type { MetricPoint, Rollout } from "./types.js";

const MARKER_COLOR: Record<EventMarker["kind"], string> = {
  "rollout-start": "#2a7ae2",
  "guardrail-pause": "#e2a52a",
  "guardrail-rollback": "#d43f3f",
};

function markerPlugin(markers: () => EventMarker[]): uPlot.Plugin {
  return {
    hooks: {
      draw: (u: uPlot) => {
        const ctx = u.ctx;
        ctx.save();
        for (const marker of markers()) {
          const x = u.valToPos(marker.day, "x", true);
          if (x < u.bbox.left || x > u.bbox.left + u.bbox.width) continue;
          ctx.strokeStyle = MARKER_COLOR[marker.kind];
          ctx.lineWidth = marker.kind === "rollout-start" ? 1 : 2;
          ctx.beginPath();
          ctx.moveTo(x, u.bbox.top);
          ctx.lineTo(x, u.bbox.top + u.bbox.height);
          ctx.stroke();
        }
        ctx.restore();
      },
    },
  };
}

export class Charts {
  private nePlot: uPlot | null = null;
  private coveragePlot: uPlot | null = null;
  private markers: EventMarker[] = [];
  smoothingWindow = 1;

  constructor(
    private readonly neContainer: HTMLElement,
    private readonly coverageContainer: HTMLElement,
  ) {}

  update(points: MetricPoint[], rollouts: Rollout[]): void {
    this.markers = eventMarkers(points, rollouts);
    this.updateNe(points);
    this.updateCoverage(points);
  }

  private updateNe(points: MetricPoint[]): void {
    const series = neSeries(points);
    const shown =
      this.smoothingWindow > 1
        ? smoothed(series.ne, this.smoothingWindow)
        : series.ne;
    const data: uPlot.AlignedData = [series.days, shown];
    if (this.nePlot === null) {
      this.nePlot = new uPlot(
        {
          width: this.neContainer.clientWidth || 640,
          height: 220,
          title: "normalized entropy",
          scales: { x: { time: false } },
          series: [
            { label: "day" },
            { label: "NE", stroke: "#1b7f5e", width: 2 },
          ],
          plugins: [markerPlugin(() => this.markers)],
        },
        data,
        this.neContainer,
      );
    } else {
      this.nePlot.setData(data);
    }
  }

  private updateCoverage(points: MetricPoint[]): void {
    const curves = coverageSeries(points);
    const days = neSeries(points).days;
    const aligned: (number | null)[][] = curves.map((curve) => {
      const byDay = new Map(curve.days.map((d, i) => [d, curve.coverage[i]!]));
      return days.map((d) => byDay.get(d) ?? null);
    });
    const data = [days, ...aligned] as uPlot.AlignedData;
    const palette = ["#2a7ae2", "#d43f3f", "#e2a52a", "#7a2ae2", "#2ae2c9",
                     "#e22a7a", "#6b8e23"];
    if (this.coveragePlot !== null && (
      this.coveragePlot.series.length - 1 !== curves.length
    )) {
      this.coveragePlot.destroy();
      this.coveragePlot = null;
    }
    if (this.coveragePlot === null) {
      this.coveragePlot = new uPlot(
        {
          width: this.coverageContainer.clientWidth || 640,
          height: 180,
          title: "feature coverage",
          scales: { x: { time: false }, y: { range: [0, 1.05] } },
          series: [
            { label: "day" },
            ...curves.map((curve, i) => ({
              label: curve.feature,
              stroke: palette[i % palette.length],
              width: 1.5,
            })),
          ],
        },
        data,
        this.coverageContainer,
      );
    } else {
      this.coveragePlot.setData(data);
    }
  }
}
