/** Console session state: a polling cursor plus the local view of server
 * truth. The console never simulates anything itself; every number shown is
 * taken from an API payload, and a failed poll only flips the stale flag
 * while keeping the last good data on screen.
 */

import { ApiClient } from "./client.js";
import type {
  MetricPoint,
  Rollout,
  RolloutAction,
  ServerState,
} from "./types.js";

export interface ConsoleView {
  day: number;
  snapshotVersion: number;
  autoSecondsPerDay: number | null;
  rollouts: Rollout[];
  metrics: MetricPoint[];
  stale: boolean;
  lastGoodDay: number;
  lastError: string | null;
}

/** Actions allowed per rollout state; drives button enablement. */
export function allowedActions(state: Rollout["state"]): RolloutAction[] {
  switch (state) {
    case "Active":
      return ["pause", "rollback"];
    case "Paused":
      return ["resume", "rollback"];
    default:
      return [];
  }
}

/** Rate adjustment is allowed only while the ramp is not running. */
export function canSetRate(state: Rollout["state"]): boolean {
  return state === "Pending" || state === "Paused";
}

export class ConsoleSession {
  readonly client: ApiClient;
  private sinceDay = -1;
  private view: ConsoleView = {
    day: 0,
    snapshotVersion: 0,
    autoSecondsPerDay: null,
    rollouts: [],
    metrics: [],
    stale: false,
    lastGoodDay: 0,
    lastError: null,
  };

  constructor(client: ApiClient) {
    this.client = client;
  }

  snapshot(): ConsoleView {
    return {
      ...this.view,
      rollouts: [...this.view.rollouts],
      metrics: [...this.view.metrics],
    };
  }

  /** One poll cycle: state + rollouts + metric points past the cursor. */
  async poll(): Promise<ConsoleView> {
    try {
      const state = await this.client.getState();
      const rollouts = await this.client.listRollouts();
      const metrics = await this.client.getMetrics(this.sinceDay);
      const fresh = metrics.payload.points;
      if (fresh.length > 0) {
        this.view.metrics = [...this.view.metrics, ...fresh];
        this.sinceDay = fresh[fresh.length - 1]!.day;
      }
      const payload: ServerState = state.payload;
      this.view.day = payload.day;
      this.view.snapshotVersion = state.snapshot_version;
      this.view.autoSecondsPerDay = payload.auto_step_seconds_per_day;
      this.view.rollouts = rollouts.payload.rollouts;
      this.view.stale = false;
      this.view.lastGoodDay = payload.day;
      this.view.lastError = null;
    } catch (err) {
      this.view.stale = true;
      this.view.lastError = err instanceof Error ? err.message : String(err);
    }
    return this.snapshot();
  }

  /** Issue a lifecycle action, then refresh from server truth. */
  async act(rolloutId: string, action: RolloutAction): Promise<ConsoleView> {
    await this.client.rolloutAction(rolloutId, action);
    return this.poll();
  }

  async setRate(rolloutId: string, ratePerDay: number): Promise<ConsoleView> {
    await this.client.setRate(rolloutId, ratePerDay);
    return this.poll();
  }

  async step(days: number): Promise<ConsoleView> {
    await this.client.stepDays(days);
    return this.poll();
  }

  async setAuto(secondsPerDay: number | null): Promise<ConsoleView> {
    if (secondsPerDay === null) {
      await this.client.disableAuto();
    } else {
      await this.client.enableAuto(secondsPerDay);
    }
    return this.poll();
  }
}
