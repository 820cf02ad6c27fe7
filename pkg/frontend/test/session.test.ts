/** ConsoleSession against recorded fixtures: the rendered view derives
 * solely from API responses, polls are cursor-based, and a failed poll
 * flips the stale flag while keeping last-good data. */

import { readFileSync } from "node:fs";
import path from "node:path";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { allowedActions, canSetRate, ConsoleSession } from "../src/session.js";

function fixture(name: string): any {
  return JSON.parse(
    readFileSync(path.join(__dirname, "fixtures", `${name}.json`), "utf-8"),
  );
}

/** fetch stub that serves fixtures and records requests. */
function stubFetch(routes: Record<string, any>, log: string[] = []) {
  const fn = async (url: string | URL | Request, init?: RequestInit) => {
    const u = String(url);
    const pathPart = u.replace(/^https?:\/\/[^/]+/, "");
    log.push(`${init?.method ?? "GET"} ${pathPart}`);
    for (const [prefix, body] of Object.entries(routes)) {
      if (pathPart.startsWith(prefix)) {
        return {
          ok: true,
          status: 200,
          json: async () => body,
        } as Response;
      }
    }
    throw new Error(`no route for ${pathPart}`);
  };
  return fn as typeof fetch;
}

describe("poll", () => {
  it("derives the view from server payloads only", async () => {
    const log: string[] = [];
    const client = new ApiClient(
      "http://server",
      stubFetch(
        {
          "/v1/state": fixture("state_mid_fade"),
          "/v1/rollouts": fixture("rollouts_mid_fade"),
          "/v1/metrics": fixture("metrics_mid_fade"),
        },
        log,
      ),
    );
    const session = new ConsoleSession(client);
    const view = await session.poll();

    const state = fixture("state_mid_fade");
    expect(view.day).toBe(state.payload.day);
    expect(view.snapshotVersion).toBe(state.snapshot_version);
    expect(view.rollouts).toEqual(fixture("rollouts_mid_fade").payload.rollouts);
    expect(view.metrics).toEqual(fixture("metrics_mid_fade").payload.points);
    expect(view.stale).toBe(false);
    expect(log).toContain("GET /v1/metrics?since_day=-1");
  });

  it("advances the since_day cursor and appends only new points", async () => {
    const log: string[] = [];
    const client = new ApiClient(
      "http://server",
      stubFetch(
        {
          "/v1/state": fixture("state_mid_fade"),
          "/v1/rollouts": fixture("rollouts_mid_fade"),
          "/v1/metrics": fixture("metrics_mid_fade"),
        },
        log,
      ),
    );
    const session = new ConsoleSession(client);
    await session.poll();
    const view = await session.poll();
    const points = fixture("metrics_mid_fade").payload.points;
    const lastDay = points[points.length - 1].day;
    expect(log).toContain(`GET /v1/metrics?since_day=${lastDay}`);
    // stub replays the same fixture, so duplicate days would double the list
    // if the cursor did not deduplicate by construction; verify count growth
    expect(view.metrics.length).toBe(points.length * 2);
  });

  it("flips the stale banner on connection loss and keeps last-good data", async () => {
    let healthy = true;
    const routes = {
      "/v1/state": fixture("state_mid_fade"),
      "/v1/rollouts": fixture("rollouts_mid_fade"),
      "/v1/metrics": fixture("metrics_mid_fade"),
    };
    const flaky = (async (url: any, init?: any) => {
      if (!healthy) throw new Error("ECONNREFUSED");
      return stubFetch(routes)(url, init);
    }) as typeof fetch;
    const session = new ConsoleSession(new ApiClient("http://server", flaky));
    const good = await session.poll();
    expect(good.stale).toBe(false);
    healthy = false;
    const bad = await session.poll();
    expect(bad.stale).toBe(true);
    expect(bad.lastGoodDay).toBe(good.day);
    expect(bad.rollouts).toEqual(good.rollouts);
    expect(bad.metrics.length).toBe(good.metrics.length);
  });
});

describe("mutations", () => {
  it("sends idempotency keys on every action", async () => {
    const captured: Array<Record<string, string>> = [];
    const fn = (async (url: any, init?: RequestInit) => {
      captured.push((init?.headers ?? {}) as Record<string, string>);
      return {
        ok: true,
        status: 200,
        json: async () => fixture("rollouts_mid_fade"),
      } as Response;
    }) as typeof fetch;
    const client = new ApiClient("http://server", fn);
    await client.rolloutAction("ro-0001", "pause");
    await client.stepDays(3);
    await client.setRate("ro-0001", 0.05);
    for (const headers of captured) {
      expect(headers["Idempotency-Key"]).toBeTruthy();
    }
    const keys = captured.map((h) => h["Idempotency-Key"]);
    expect(new Set(keys).size).toBe(keys.length);
  });
});

describe("action gating by state", () => {
  it("enables exactly the documented transitions", () => {
    expect(allowedActions("Active")).toEqual(["pause", "rollback"]);
    expect(allowedActions("Paused")).toEqual(["resume", "rollback"]);
    expect(allowedActions("Pending")).toEqual([]);
    expect(allowedActions("Completed")).toEqual([]);
    expect(allowedActions("RolledBack")).toEqual([]);
  });

  it("set-rate requires a non-running ramp", () => {
    expect(canSetRate("Pending")).toBe(true);
    expect(canSetRate("Paused")).toBe(true);
    expect(canSetRate("Active")).toBe(false);
    expect(canSetRate("Completed")).toBe(false);
  });
});
