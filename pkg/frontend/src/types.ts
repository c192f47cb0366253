/**
 * DTOs mirroring the service's JSON documents.
 *
 * These are shapes, not logic: every number the UI shows comes straight off
 * one of these, and the UI never derives candidate sets or statistics on its
 * own.
 */

export type SessionStatus = "Running" | "AwaitingFeedback" | "Finished" | "Failed";

export interface EngineConfigDto {
  population_size?: number;
  crossover_prob?: number;
  mutation_prob?: number;
  max_derivations?: number;
  max_generations?: number;
  max_interactions?: number;
  first_interaction_generation?: number;
  cv_folds?: number;
  seed?: number;
}

export interface CreateSessionRequest {
  dataset: string;
  config?: EngineConfigDto;
  grammar?: string;
  baseline?: string;
}

export interface CreateSessionResponse {
  session_id: string;
  dataset_name: string;
  config: Required<EngineConfigDto>;
  created_at: string;
  status: SessionStatus;
}

export interface StatusResponse extends CreateSessionResponse {
  generation: number;
  interactions_used: number;
  error?: string;
}

export interface SnapshotEntryDto {
  workflow: string;
  fitness: number;
  eval_time: number;
  failed: boolean;
  classifier: string;
  generation: number;
}

export interface SymbolStatsDto {
  symbol: string;
  kind: string;
  occurrences: number;
  max_fitness: number;
  max_eval_time: number;
  mean_eval_time: number;
}

export interface PartitionDto {
  r_best: SnapshotEntryDto[];
  r_worst: SnapshotEntryDto[];
}

export interface CandidatesDto {
  algorithms: string[];
  hyperparameter_values: string[];
}

export interface SnapshotDto {
  individuals: SnapshotEntryDto[];
  best_current: SnapshotEntryDto;
  best_global: SnapshotEntryDto;
  stats: SymbolStatsDto[];
  partition: PartitionDto | null;
  candidates: CandidatesDto | null;
  budget: { interactions_left: number; generations_left: number };
  time_divergence: [number, number, number | null][];
}

export interface ThresholdsDto {
  t_acc?: number | null;
  t_time?: number | null;
}

export interface DecisionDto {
  kind: "Continue" | "Stop";
  generations_until_next?: number | null;
}

export interface FeedbackRequest {
  decision: DecisionDto;
  remove_algorithms: string[];
  remove_hyperparameter_values: string[];
  thresholds_used: ThresholdsDto;
}

export interface FeedbackResponse {
  applied_removals: { algorithms: string[]; hyperparameter_values: string[] };
  status: SessionStatus;
}

export interface ResultResponse {
  archive: { workflow: string; fitness: number; eval_time: number };
  cumulative_eval_time: number;
  generations: number;
  interactions_used: number;
  logs: { run: string; interactions: string };
}

export interface TimelineResponse {
  timeline: number[];
  baseline_timeline: number[] | null;
}

export interface ViolationDetail {
  violations: string[];
}
