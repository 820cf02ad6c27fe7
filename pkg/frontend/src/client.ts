/** Typed fetch client for the /v1 API.
 *
 * Every mutation carries a fresh idempotency key so an accidental replay
 * (double click, retry after a timeout) cannot double-apply.
 */

import type {
  AutoStepState,
  Envelope,
  Metrics,
  Rollout,
  RolloutAction,
  RolloutList,
  Schedule,
  ServerState,
  StepResult,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

function newIdempotencyKey(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    idempotent = false,
  ): Promise<Envelope<T>> {
    const headers: Record<string, string> = { Accept: "application/json" };
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (idempotent) headers["Idempotency-Key"] = newIdempotencyKey();
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const json = await resp.json();
    if (!resp.ok) {
      const code = json?.error?.code ?? "http-error";
      const message = json?.error?.message ?? `HTTP ${resp.status}`;
      throw new ApiRequestError(code, message, resp.status);
    }
    return json as Envelope<T>;
  }

  getState(): Promise<Envelope<ServerState>> {
    return this.request("GET", "/v1/state");
  }

  listRollouts(): Promise<Envelope<RolloutList>> {
    return this.request("GET", "/v1/rollouts");
  }

  getMetrics(sinceDay: number): Promise<Envelope<Metrics>> {
    return this.request("GET", `/v1/metrics?since_day=${sinceDay}`);
  }

  createRollout(body: {
    features: string[];
    schedule: Schedule;
    max_daily_ne_increase: number;
    max_cumulative_ne_increase: number;
    max_duration_days: number;
  }): Promise<Envelope<Rollout>> {
    return this.request("POST", "/v1/rollouts", body, true);
  }

  rolloutAction(id: string, action: RolloutAction): Promise<Envelope<Rollout>> {
    return this.request("POST", `/v1/rollouts/${id}/${action}`, undefined, true);
  }

  setRate(id: string, ratePerDay: number): Promise<Envelope<Rollout>> {
    return this.request(
      "PATCH",
      `/v1/rollouts/${id}/rate`,
      { rate_per_day: ratePerDay },
      true,
    );
  }

  stepDays(days: number): Promise<Envelope<StepResult>> {
    return this.request("POST", `/v1/clock/step?days=${days}`, undefined, true);
  }

  enableAuto(secondsPerDay: number): Promise<Envelope<AutoStepState>> {
    return this.request(
      "POST",
      "/v1/clock/auto",
      { seconds_per_day: secondsPerDay },
      true,
    );
  }

  disableAuto(): Promise<Envelope<AutoStepState>> {
    return this.request("DELETE", "/v1/clock/auto", undefined, true);
  }
}
