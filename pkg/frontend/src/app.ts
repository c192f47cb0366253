/**
 * Single-page wiring: one polling loop against the steering service, and
 * a render pass that projects the view state into the static panels laid
 * out in index.html. All decisions live in state.ts and the view-model
 * modules; this file only moves data between them and the DOM.
 */

import { EvoflowClient, ServiceError } from "./api.js";
import {
  buildFeedback,
  canSubmit,
  hasCandidates,
  initialState,
  onCandidates,
  onFeedbackAccepted,
  onFeedbackRejected,
  onFeedbackSent,
  onSessionCreated,
  onSnapshot,
  onStatus,
  setPendingGenerations,
  setThreshold,
  toggleAlgorithm,
  toggleClassifier,
  toggleValue,
  type ViewState,
} from "./state.js";
import { buildScatterModel, renderScatterSvg } from "./scatter.js";
import { buildTables, type AlgorithmRow, type ValueRow } from "./tables.js";
import { buildDivergenceModel, renderDivergenceSvg } from "./divergence.js";
import type { ResultResponse, SnapshotDto } from "./types.js";

const POLL_MS = 500;
const DEBOUNCE_MS = 200;

const client = new EvoflowClient("");
let state: ViewState = initialState();
let pollTimer: ReturnType<typeof setTimeout> | null = null;
let sliderTimer: ReturnType<typeof setTimeout> | null = null;
let result: ResultResponse | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setState(next: ViewState): void {
  state = next;
  render();
}

// ---------------------------------------------------------------- session

async function createSession(): Promise<void> {
  const dataset = el<HTMLInputElement>("dataset").value.trim() || "breastcancer";
  const config = {
    population_size: Number(el<HTMLInputElement>("pop").value) || 30,
    max_generations: Number(el<HTMLInputElement>("gens").value) || 30,
    max_interactions: Number(el<HTMLInputElement>("interactions").value) || 3,
    first_interaction_generation: Number(el<HTMLInputElement>("first").value) || 9,
    seed: Number(el<HTMLInputElement>("seed").value) || 0,
  };
  try {
    const created = await client.createSession({ dataset, config });
    result = null;
    setState(onSessionCreated(state, created.session_id));
    schedulePoll(0);
  } catch (err) {
    showError(err);
  }
}

function schedulePoll(delay: number): void {
  if (pollTimer !== null) clearTimeout(pollTimer);
  pollTimer = setTimeout(() => void poll(), delay);
}

async function poll(): Promise<void> {
  if (state.sessionId === null) return;
  try {
    const status = await client.status(state.sessionId);
    const wasPaused = state.phase === "paused";
    setState(onStatus(state, status));
    if (status.status === "AwaitingFeedback" && !wasPaused) {
      const { snapshot } = await client.snapshot(state.sessionId);
      setState(onSnapshot(state, snapshot));
      await refreshCandidates();
    } else if (status.status === "Finished") {
      result = await client.result(state.sessionId);
      render();
      return;
    } else if (status.status === "Failed") {
      render();
      return;
    }
    if (status.status === "Running" || (status.status === "AwaitingFeedback" && state.feedbackInFlight)) {
      schedulePoll(POLL_MS);
    }
  } catch (err) {
    showError(err);
    schedulePoll(POLL_MS * 4);
  }
}

// ------------------------------------------------------------- candidates

async function refreshCandidates(): Promise<void> {
  if (state.sessionId === null || state.snapshot === null) return;
  const thresholds = state.thresholds;
  if (thresholds.t_acc === undefined && thresholds.t_time === undefined) {
    setState({ ...state, candidateFetch: null });
    return;
  }
  try {
    const fetch = await client.snapshot(state.sessionId, thresholds);
    setState(onCandidates(state, fetch));
  } catch (err) {
    showError(err);
  }
}

function onSliderInput(axis: "t_acc" | "t_time", raw: string, enabled: boolean): void {
  const value = enabled ? Number(raw) : null;
  setState(setThreshold(state, axis, value));
  if (sliderTimer !== null) clearTimeout(sliderTimer);
  sliderTimer = setTimeout(() => void refreshCandidates(), DEBOUNCE_MS);
}

// --------------------------------------------------------------- feedback

async function submit(kind: "Continue" | "Stop"): Promise<void> {
  if (!canSubmit(state) || state.sessionId === null) return;
  const decision =
    kind === "Stop"
      ? { kind: "Stop" as const }
      : { kind: "Continue" as const, generations_until_next: state.pendingGenerations };
  const body = buildFeedback(state, decision);
  setState(onFeedbackSent(state));
  try {
    await client.submitFeedback(state.sessionId, body);
    setState(onFeedbackAccepted(state));
    schedulePoll(0);
  } catch (err) {
    if (err instanceof ServiceError && err.status === 422) {
      setState(onFeedbackRejected(state, err.violations));
    } else {
      setState({ ...state, feedbackInFlight: false });
      showError(err);
    }
  }
}

// ----------------------------------------------------------------- render

function showError(err: unknown): void {
  const box = el<HTMLDivElement>("error");
  box.textContent = err instanceof Error ? err.message : String(err);
  box.hidden = false;
}

function renderStatusLine(): void {
  const line = el<HTMLDivElement>("status-line");
  if (state.status === null) {
    line.textContent = "No session.";
    return;
  }
  const s = state.status;
  line.textContent =
    `${s.dataset_name} | ${s.status} | generation ${s.generation}/${s.config.max_generations}` +
    ` | interactions used ${s.interactions_used}/${s.config.max_interactions}` +
    (s.error ? ` | ${s.error}` : "");
}

function renderScatter(snapshot: SnapshotDto): void {
  const model = buildScatterModel(snapshot, state.thresholds, state.hiddenClassifiers);
  el<HTMLDivElement>("scatter").innerHTML = renderScatterSvg(model);
  attachZoom();

  const legend = el<HTMLDivElement>("legend");
  legend.innerHTML = "";
  for (const entry of model.legend) {
    const item = document.createElement("button");
    item.className = "legend-entry" + (entry.hidden ? " hidden-classifier" : "");
    item.style.setProperty("--swatch", entry.color);
    item.textContent = entry.classifier;
    item.addEventListener("click", () => {
      setState(toggleClassifier(state, entry.classifier));
    });
    legend.appendChild(item);
  }
}

function attachZoom(): void {
  const svg = document.querySelector<SVGSVGElement>("#scatter svg");
  if (!svg) return;
  svg.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const box = svg.viewBox.baseVal;
    const factor = ev.deltaY < 0 ? 0.9 : 1.1;
    const mx = box.x + (ev.offsetX / svg.clientWidth) * box.width;
    const my = box.y + (ev.offsetY / svg.clientHeight) * box.height;
    box.x = mx - (mx - box.x) * factor;
    box.y = my - (my - box.y) * factor;
    box.width *= factor;
    box.height *= factor;
  });
}

function renderSliders(snapshot: SnapshotDto): void {
  if (state.ranges === null) return;
  const acc = el<HTMLInputElement>("t-acc");
  const time = el<HTMLInputElement>("t-time");
  const [fLo, fHi] = state.ranges.fitness;
  const [tLo, tHi] = state.ranges.time;
  acc.min = String(fLo);
  acc.max = String(fHi);
  acc.step = String((fHi - fLo) / 200 || 0.001);
  time.min = String(tLo);
  time.max = String(tHi);
  time.step = String((tHi - tLo) / 200 || 0.001);
  el<HTMLSpanElement>("t-acc-value").textContent =
    state.thresholds.t_acc == null ? "off" : fmtShort(state.thresholds.t_acc);
  el<HTMLSpanElement>("t-time-value").textContent =
    state.thresholds.t_time == null ? "off" : fmtShort(state.thresholds.t_time);
  el<HTMLSpanElement>("budget").textContent =
    `${snapshot.budget.interactions_left} interaction(s), ` +
    `${snapshot.budget.generations_left} generation(s) left`;
}

function fmtShort(v: number): string {
  return v >= 100 ? v.toFixed(1) : v.toPrecision(4);
}

function rowHtml(cells: string[]): string {
  return `<tr>${cells.join("")}</tr>`;
}

function renderTables(): void {
  const algoBody = el<HTMLTableSectionElement>("algo-rows");
  const valueBody = el<HTMLTableSectionElement>("value-rows");
  algoBody.innerHTML = "";
  valueBody.innerHTML = "";
  const snapshot = state.candidateFetch?.snapshot ?? null;
  const tables = snapshot ? buildTables(snapshot) : { algorithms: [], values: [] };

  const checkboxCell = (symbol: string, checked: boolean, group: "algo" | "value") =>
    `<td><input type="checkbox" data-group="${group}" data-symbol="${escapeHtml(symbol)}"${checked ? " checked" : ""}></td>`;

  for (const row of tables.algorithms) {
    algoBody.insertAdjacentHTML(
      "beforeend",
      rowHtml([
        checkboxCell(row.symbol, state.checkedAlgorithms.has(row.symbol), "algo"),
        `<td>${escapeHtml(row.symbol)}</td>`,
        `<td>${escapeHtml(row.kind)}</td>`,
        `<td>${row.occurrences}</td>`,
        `<td>${fmtShort(row.maxFitness)}</td>`,
        `<td>${fmtShort(row.maxEvalTime)}</td>`,
        `<td>${fmtShort(row.meanEvalTime)}</td>`,
      ]),
    );
  }
  for (const row of tables.values) {
    valueBody.insertAdjacentHTML(
      "beforeend",
      rowHtml([
        checkboxCell(row.symbol, state.checkedValues.has(row.symbol), "value"),
        `<td>${escapeHtml(row.symbol)}</td>`,
        `<td>${escapeHtml(row.algorithm)}</td>`,
        `<td>${row.occurrences}</td>`,
        `<td>${fmtShort(row.maxFitness)}</td>`,
        `<td>${fmtShort(row.maxEvalTime)}</td>`,
        `<td>${fmtShort(row.meanEvalTime)}</td>`,
      ]),
    );
  }

  for (const input of document.querySelectorAll<HTMLInputElement>("input[data-symbol]")) {
    input.addEventListener("change", () => {
      const symbol = input.dataset["symbol"] ?? "";
      setState(
        input.dataset["group"] === "algo"
          ? toggleAlgorithm(state, symbol)
          : toggleValue(state, symbol),
      );
    });
  }
}

function escapeHtml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function renderResult(): void {
  const panel = el<HTMLDivElement>("results");
  if (result === null) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  const best = result.archive;
  el<HTMLTableSectionElement>("result-rows").innerHTML = rowHtml([
    `<td>${escapeHtml(best.workflow)}</td>`,
    `<td>${best.fitness.toFixed(4)}</td>`,
    `<td>${best.eval_time.toFixed(3)}</td>`,
  ]);
  el<HTMLDivElement>("result-summary").textContent =
    `${result.generations} generations, ${result.interactions_used} interactions, ` +
    `${result.cumulative_eval_time.toFixed(2)}s cumulative evaluation time`;
}

function render(): void {
  el<HTMLDivElement>("error").hidden = true;
  renderStatusLine();

  const paused = state.phase === "paused" && state.snapshot !== null;
  el<HTMLDivElement>("steering").hidden = !paused;
  el<HTMLDivElement>("results").hidden = state.phase !== "finished";

  if (paused && state.snapshot) {
    renderScatter(state.snapshot);
    renderSliders(state.snapshot);
    renderTables();
    el<HTMLDivElement>("divergence").innerHTML = renderDivergenceSvg(
      buildDivergenceModel(state.snapshot.time_divergence),
    );

    const notice = el<HTMLDivElement>("notice");
    notice.hidden = state.notice === null;
    notice.textContent = state.notice ?? "";

    const banner = el<HTMLDivElement>("violations");
    banner.hidden = state.violations.length === 0;
    banner.innerHTML = state.violations.map((v) => `<div>${escapeHtml(v)}</div>`).join("");

    const submitOk = canSubmit(state);
    el<HTMLButtonElement>("continue").disabled = !submitOk;
    el<HTMLButtonElement>("stop").disabled = !submitOk;
    el<HTMLInputElement>("pending-gens").value = String(state.pendingGenerations);
    const checklistEmpty = !hasCandidates(state);
    el<HTMLDivElement>("tables-empty").hidden = !checklistEmpty;
  }

  if (state.phase === "finished") renderResult();
}

// ------------------------------------------------------------------ init

export function main(): void {
  el<HTMLButtonElement>("create").addEventListener("click", () => void createSession());
  el<HTMLInputElement>("t-acc").addEventListener("input", (ev) => {
    el<HTMLInputElement>("t-acc-enabled").checked = true;
    onSliderInput("t_acc", (ev.target as HTMLInputElement).value, true);
  });
  el<HTMLInputElement>("t-time").addEventListener("input", (ev) => {
    el<HTMLInputElement>("t-time-enabled").checked = true;
    onSliderInput("t_time", (ev.target as HTMLInputElement).value, true);
  });
  el<HTMLInputElement>("t-acc-enabled").addEventListener("change", (ev) => {
    const on = (ev.target as HTMLInputElement).checked;
    onSliderInput("t_acc", el<HTMLInputElement>("t-acc").value, on);
  });
  el<HTMLInputElement>("t-time-enabled").addEventListener("change", (ev) => {
    const on = (ev.target as HTMLInputElement).checked;
    onSliderInput("t_time", el<HTMLInputElement>("t-time").value, on);
  });
  el<HTMLInputElement>("pending-gens").addEventListener("change", (ev) => {
    setState(setPendingGenerations(state, Number((ev.target as HTMLInputElement).value)));
  });
  el<HTMLButtonElement>("continue").addEventListener("click", () => void submit("Continue"));
  el<HTMLButtonElement>("stop").addEventListener("click", () => void submit("Stop"));
  render();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  main();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", main);
}
