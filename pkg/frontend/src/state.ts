/**
 * View state and reducers for the steering UI.
 *
 * Everything here is plain data plus pure functions so the invariants can
 * be tested without a DOM. The app layer owns the actual fetch timing and
 * event wiring; it calls into these reducers and re-renders from the
 * returned state.
 *
 * Invariants enforced here:
 *  - slider values stay within the fitness/time ranges of the current
 *    snapshot,
 *  - checked removals are always a subset of the candidates the service
 *    reported for the current slider position,
 *  - a Continue request never exceeds the remaining generation budget
 *    (clamped client-side, with a visible notice),
 *  - a rejected feedback batch leaves the checklist untouched.
 */

import type {
  DecisionDto,
  FeedbackRequest,
  SnapshotDto,
  StatusResponse,
  ThresholdsDto,
} from "./types.js";
import type { SnapshotFetch } from "./api.js";

export type Phase =
  | "configuring"
  | "running"
  | "paused"
  | "finished"
  | "failed";

export interface SliderRanges {
  fitness: [number, number];
  time: [number, number];
}

export interface ViewState {
  phase: Phase;
  sessionId: string | null;
  status: StatusResponse | null;
  /** Plain snapshot for the current pause (no thresholds applied). */
  snapshot: SnapshotDto | null;
  /** Thresholded snapshot for the current slider position, with raw text. */
  candidateFetch: SnapshotFetch | null;
  ranges: SliderRanges | null;
  thresholds: ThresholdsDto;
  hiddenClassifiers: ReadonlySet<string>;
  checkedAlgorithms: ReadonlySet<string>;
  checkedValues: ReadonlySet<string>;
  /** Generations requested for the next Continue. */
  pendingGenerations: number;
  /** One-line notice (budget clamp and similar), cleared on next action. */
  notice: string | null;
  /** Violations from the last rejected batch, empty when none. */
  violations: readonly string[];
  /** True while a feedback request is on the wire; blocks a second one. */
  feedbackInFlight: boolean;
}

export function initialState(): ViewState {
  return {
    phase: "configuring",
    sessionId: null,
    status: null,
    snapshot: null,
    candidateFetch: null,
    ranges: null,
    thresholds: {},
    hiddenClassifiers: new Set(),
    checkedAlgorithms: new Set(),
    checkedValues: new Set(),
    pendingGenerations: 1,
    notice: null,
    violations: [],
    feedbackInFlight: false,
  };
}

export function onSessionCreated(state: ViewState, sessionId: string): ViewState {
  return { ...initialState(), phase: "running", sessionId };
}

export function onStatus(state: ViewState, status: StatusResponse): ViewState {
  let phase: Phase = state.phase;
  if (status.status === "Running") phase = "running";
  else if (status.status === "AwaitingFeedback") phase = "paused";
  else if (status.status === "Finished") phase = "finished";
  else if (status.status === "Failed") phase = "failed";
  return { ...state, status, phase };
}

function rangesOf(snapshot: SnapshotDto): SliderRanges {
  const scored = snapshot.individuals.filter((e) => !e.failed);
  const pool = scored.length > 0 ? scored : snapshot.individuals;
  if (pool.length === 0) {
    return { fitness: [0, 1], time: [0, 1] };
  }
  const fits = pool.map((e) => e.fitness);
  const times = pool.map((e) => e.eval_time);
  return {
    fitness: [Math.min(...fits), Math.max(...fits)],
    time: [Math.min(...times), Math.max(...times)],
  };
}

/**
 * A fresh pause: store the plain snapshot, derive slider ranges, and drop
 * any thresholds/checks carried over from the previous pause. Candidates
 * belong to a slider position, and the sliders start disengaged.
 */
export function onSnapshot(state: ViewState, snapshot: SnapshotDto): ViewState {
  return {
    ...state,
    phase: "paused",
    snapshot,
    candidateFetch: null,
    ranges: rangesOf(snapshot),
    thresholds: {},
    checkedAlgorithms: new Set(),
    checkedValues: new Set(),
    pendingGenerations: 1,
    violations: [],
    notice: null,
  };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

/** Move a threshold slider. The value is clamped into the snapshot range. */
export function setThreshold(
  state: ViewState,
  axis: "t_acc" | "t_time",
  value: number | null,
): ViewState {
  const thresholds: ThresholdsDto = { ...state.thresholds };
  if (value === null) {
    delete thresholds[axis];
  } else if (state.ranges !== null) {
    const range = axis === "t_acc" ? state.ranges.fitness : state.ranges.time;
    thresholds[axis] = clamp(value, range[0], range[1]);
  } else {
    thresholds[axis] = value;
  }
  return { ...state, thresholds };
}

function intersect(
  checked: ReadonlySet<string>,
  allowed: readonly string[],
): ReadonlySet<string> {
  const pool = new Set(allowed);
  return new Set([...checked].filter((s) => pool.has(s)));
}

/**
 * The service answered a thresholded snapshot query. Checked removals are
 * pruned so they stay a subset of the candidates at this slider position;
 * checks that survive the move are kept.
 */
export function onCandidates(state: ViewState, fetch: SnapshotFetch): ViewState {
  const candidates = fetch.snapshot.candidates;
  const algorithms = candidates === null ? [] : candidates.algorithms;
  const values = candidates === null ? [] : candidates.hyperparameter_values;
  return {
    ...state,
    candidateFetch: fetch,
    checkedAlgorithms: intersect(state.checkedAlgorithms, algorithms),
    checkedValues: intersect(state.checkedValues, values),
  };
}

function toggled(set: ReadonlySet<string>, symbol: string): ReadonlySet<string> {
  const next = new Set(set);
  if (next.has(symbol)) next.delete(symbol);
  else next.add(symbol);
  return next;
}

/** Toggle an algorithm checkbox. Ignored unless the symbol is a candidate. */
export function toggleAlgorithm(state: ViewState, symbol: string): ViewState {
  const candidates = state.candidateFetch?.snapshot.candidates;
  if (!candidates || !candidates.algorithms.includes(symbol)) return state;
  return { ...state, checkedAlgorithms: toggled(state.checkedAlgorithms, symbol) };
}

/** Toggle a hyperparameter value checkbox. Same candidate guard. */
export function toggleValue(state: ViewState, symbol: string): ViewState {
  const candidates = state.candidateFetch?.snapshot.candidates;
  if (!candidates || !candidates.hyperparameter_values.includes(symbol)) {
    return state;
  }
  return { ...state, checkedValues: toggled(state.checkedValues, symbol) };
}

/** Legend toggle: hide or show every point of one classifier. */
export function toggleClassifier(state: ViewState, classifier: string): ViewState {
  return {
    ...state,
    hiddenClassifiers: toggled(state.hiddenClassifiers, classifier),
  };
}

/**
 * Set the Continue amount. Values below 1 snap to 1; values above the
 * remaining generation budget are clamped down with a notice so the user
 * sees why the number changed.
 */
export function setPendingGenerations(state: ViewState, requested: number): ViewState {
  let value = Math.max(1, Math.floor(requested));
  let notice: string | null = null;
  const left = state.snapshot?.budget.generations_left;
  if (left !== undefined && value > left) {
    value = Math.max(1, left);
    notice = `Only ${left} generation${left === 1 ? "" : "s"} left; request clamped to ${value}.`;
  }
  return { ...state, pendingGenerations: value, notice };
}

/** True when the removal checklists have anything to offer. */
export function hasCandidates(state: ViewState): boolean {
  const candidates = state.candidateFetch?.snapshot.candidates;
  if (!candidates) return false;
  return (
    candidates.algorithms.length > 0 ||
    candidates.hyperparameter_values.length > 0
  );
}

/** Guard for the submit controls: paused, and no feedback on the wire. */
export function canSubmit(state: ViewState): boolean {
  return state.phase === "paused" && !state.feedbackInFlight;
}

/** Assemble the feedback body from the current checks and sliders. */
export function buildFeedback(state: ViewState, decision: DecisionDto): FeedbackRequest {
  return {
    decision,
    remove_algorithms: [...state.checkedAlgorithms].sort(),
    remove_hyperparameter_values: [...state.checkedValues].sort(),
    thresholds_used: { ...state.thresholds },
  };
}

export function onFeedbackSent(state: ViewState): ViewState {
  return { ...state, feedbackInFlight: true, notice: null, violations: [] };
}

/**
 * The batch was rejected as a whole. The checklist and sliders stay as
 * they were so the user can adjust the selection, not rebuild it.
 */
export function onFeedbackRejected(
  state: ViewState,
  violations: readonly string[],
): ViewState {
  return { ...state, feedbackInFlight: false, violations: [...violations] };
}

/** Accepted: back to polling. Snapshot state belongs to the next pause. */
export function onFeedbackAccepted(state: ViewState): ViewState {
  return {
    ...state,
    feedbackInFlight: false,
    phase: "running",
    snapshot: null,
    candidateFetch: null,
    ranges: null,
    thresholds: {},
    checkedAlgorithms: new Set(),
    checkedValues: new Set(),
    violations: [],
  };
}
