/** Payload types of the /v1 control-plane API. */

export interface Envelope<T> {
  payload: T;
  day: number;
  snapshot_version: number;
  echo_id: string | null;
}

export interface ApiError {
  error: { code: string; message: string };
  day: number;
  snapshot_version: number;
}

export interface FeatureInfo {
  name: string;
  kind: string;
}

export interface ServerState {
  day: number;
  snapshot_version: number;
  features: FeatureInfo[];
  rollout_count: number;
  auto_step_seconds_per_day: number | null;
}

export interface Schedule {
  start_day: number;
  rate_per_day: number;
  initial_coverage: number;
  target_coverage: number;
  mode: string;
}

export type RolloutState =
  | "Pending"
  | "Active"
  | "Paused"
  | "Completed"
  | "RolledBack";

export interface HistoryEntry {
  day: number;
  transition: string;
  reason: string;
}

export interface Rollout {
  id: string;
  state: RolloutState;
  features: string[];
  schedule: Schedule;
  max_daily_ne_increase: number;
  max_cumulative_ne_increase: number;
  max_duration_days: number;
  paused_days_accumulated: number;
  created_day: number;
  current_coverage: number | null;
  history: HistoryEntry[];
}

export interface RolloutList {
  rollouts: Rollout[];
}

export interface MetricPoint {
  day: number;
  ne: number;
  mean_prediction: number;
  mean_label: number;
  coverage_snapshot: Record<string, number>;
  guardrail_verdict: "ok" | "paused" | "rolled_back";
}

export interface Metrics {
  points: MetricPoint[];
}

export interface StepResult {
  days_run: number;
  day: number;
  guardrail_verdicts: string[];
}

export interface AutoStepState {
  enabled: boolean;
  seconds_per_day: number | null;
}

export type RolloutAction = "pause" | "resume" | "rollback";
