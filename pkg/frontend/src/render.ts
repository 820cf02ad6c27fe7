/** DOM rendering for the console: rollout table, badges, stale banner,
 * clock controls. All values come straight from the ConsoleView. */

import { allowedActions, canSetRate, type ConsoleView } from "./session.js";
import type { Rollout, RolloutAction } from "./types.js";

export interface Handlers {
  onAction: (rolloutId: string, action: RolloutAction) => void;
  onSetRate: (rolloutId: string, rate: number) => void;
  onStep: (days: number) => void;
  onAutoToggle: (secondsPerDay: number | null) => void;
}

const BADGE_CLASS: Record<Rollout["state"], string> = {
  Pending: "badge badge-pending",
  Active: "badge badge-active",
  Paused: "badge badge-paused",
  Completed: "badge badge-completed",
  RolledBack: "badge badge-rolledback",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBanner(container: HTMLElement, view: ConsoleView): void {
  container.replaceChildren();
  if (view.stale) {
    const banner = el(
      "div",
      "banner banner-stale",
      `connection lost — showing data as of day ${view.lastGoodDay}` +
        (view.lastError ? ` (${view.lastError})` : ""),
    );
    container.appendChild(banner);
  }
}

export function renderHeader(container: HTMLElement, view: ConsoleView): void {
  container.replaceChildren(
    el("span", "day-display", `day ${view.day}`),
    el("span", "version-display", `snapshot v${view.snapshotVersion}`),
    el(
      "span",
      "auto-display",
      view.autoSecondsPerDay === null
        ? "clock: manual"
        : `clock: auto ${view.autoSecondsPerDay}s/day`,
    ),
  );
}

export function renderRolloutTable(
  container: HTMLElement,
  view: ConsoleView,
  handlers: Handlers,
): void {
  const table = el("table", "rollout-table");
  const head = el("tr");
  for (const title of ["id", "features", "state", "coverage", "rate", "actions"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);

  for (const rollout of view.rollouts) {
    const row = el("tr");
    row.dataset.rolloutId = rollout.id;
    row.appendChild(el("td", "mono", rollout.id));
    row.appendChild(el("td", "mono", rollout.features.join(", ")));
    const stateCell = el("td");
    stateCell.appendChild(el("span", BADGE_CLASS[rollout.state], rollout.state));
    row.appendChild(stateCell);
    row.appendChild(
      el(
        "td",
        "mono",
        rollout.current_coverage === null
          ? "—"
          : rollout.current_coverage.toFixed(2),
      ),
    );
    row.appendChild(el("td", "mono", rollout.schedule.rate_per_day.toFixed(3)));

    const actions = el("td", "actions");
    const allowed = allowedActions(rollout.state);
    for (const action of ["pause", "resume", "rollback"] as RolloutAction[]) {
      const button = el("button", `btn btn-${action}`, action);
      button.disabled = !allowed.includes(action);
      button.addEventListener("click", () =>
        handlers.onAction(rollout.id, action),
      );
      actions.appendChild(button);
    }
    const rateButton = el("button", "btn btn-rate", "set rate");
    rateButton.disabled = !canSetRate(rollout.state);
    rateButton.title = canSetRate(rollout.state)
      ? "adjust rate_per_day"
      : "pause the rollout first";
    rateButton.addEventListener("click", () => {
      const raw = window.prompt(
        `new rate_per_day for ${rollout.id}`,
        String(rollout.schedule.rate_per_day),
      );
      if (raw === null) return;
      const rate = Number(raw);
      if (!Number.isFinite(rate) || rate < 0 || rate > 1) return;
      handlers.onSetRate(rollout.id, rate);
    });
    actions.appendChild(rateButton);
    row.appendChild(actions);
    table.appendChild(row);
  }
  container.replaceChildren(table);
  if (view.rollouts.length === 0) {
    container.appendChild(el("p", "empty", "no rollouts yet"));
  }
}

export function renderClockControls(
  container: HTMLElement,
  view: ConsoleView,
  handlers: Handlers,
): void {
  container.replaceChildren();
  const step1 = el("button", "btn", "step 1 day");
  step1.addEventListener("click", () => handlers.onStep(1));
  const stepK = el("button", "btn", "step 7 days");
  stepK.addEventListener("click", () => handlers.onStep(7));
  const auto = el(
    "button",
    "btn",
    view.autoSecondsPerDay === null ? "auto-run 1s/day" : "stop auto-run",
  );
  auto.addEventListener("click", () =>
    handlers.onAutoToggle(view.autoSecondsPerDay === null ? 1.0 : null),
  );
  container.append(step1, stepK, auto);
}

export function renderErrorToast(container: HTMLElement, message: string): void {
  const toast = el("div", "toast", message);
  container.appendChild(toast);
  setTimeout(() => toast.remove(), 6000);
}
