/** Console bootstrap: wire the session, charts, and controls together.
 * Server base address comes from ?api=... (default http://127.0.0.1:8321).
 * One in-flight poll at a time; mutations trigger an immediate refresh.
 */

import { ApiClient, ApiRequestError } from "./client.js";
import { Charts } from "./charts.js";
import {
  renderBanner,
  renderClockControls,
  renderErrorToast,
  renderHeader,
  renderRolloutTable,
  type Handlers,
} from "./render.js";
import { ConsoleSession } from "./session.js";

const MANUAL_POLL_MS = 2000;

function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return (fromQuery ?? "http://127.0.0.1:8321").replace(/\/$/, "");
}

function required(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function start(): Promise<void> {
  const session = new ConsoleSession(new ApiClient(baseUrl()));
  const charts = new Charts(required("ne-chart"), required("coverage-chart"));
  const toastHost = required("toasts");

  let polling = false;
  let mutating = false;

  function redraw(): void {
    const view = session.snapshot();
    renderBanner(required("banner"), view);
    renderHeader(required("header-status"), view);
    renderRolloutTable(required("rollout-table"), view, handlers);
    renderClockControls(required("clock-controls"), view, handlers);
    charts.update(view.metrics, view.rollouts);
  }

  async function guarded(work: () => Promise<unknown>): Promise<void> {
    if (mutating) return; // one in-flight mutation at a time
    mutating = true;
    try {
      await work();
    } catch (err) {
      const message =
        err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err);
      renderErrorToast(toastHost, message);
      await session.poll();
    } finally {
      mutating = false;
      redraw();
    }
  }

  const handlers: Handlers = {
    onAction: (id, action) => void guarded(() => session.act(id, action)),
    onSetRate: (id, rate) => void guarded(() => session.setRate(id, rate)),
    onStep: (days) => void guarded(() => session.step(days)),
    onAutoToggle: (seconds) => void guarded(() => session.setAuto(seconds)),
  };

  const smoothingToggle = required("smoothing-toggle") as HTMLInputElement;
  smoothingToggle.addEventListener("change", () => {
    charts.smoothingWindow = smoothingToggle.checked ? 5 : 1;
    redraw();
  });

  async function pollLoop(): Promise<void> {
    if (!polling) {
      polling = true;
      try {
        await session.poll();
        redraw();
      } finally {
        polling = false;
      }
    }
    const auto = session.snapshot().autoSecondsPerDay;
    // poll once per auto-step interval while auto-running, otherwise 2 s
    const interval = auto === null ? MANUAL_POLL_MS : Math.max(auto * 1000, 250);
    window.setTimeout(() => void pollLoop(), interval);
  }

  await pollLoop();
}

window.addEventListener("load", () => void start());
