/** Snapshot builders shared by the view-model tests. */

import type {
  CandidatesDto,
  SnapshotDto,
  SnapshotEntryDto,
  SymbolStatsDto,
} from "../src/types.js";

export function entry(partial: Partial<SnapshotEntryDto> = {}): SnapshotEntryDto {
  return {
    workflow: "standardScaler()|kNN(n_neighbors=5,weights=uniform)",
    fitness: 0.8,
    eval_time: 0.05,
    failed: false,
    classifier: "kNN",
    generation: 3,
    ...partial,
  };
}

export function stats(partial: Partial<SymbolStatsDto> = {}): SymbolStatsDto {
  return {
    symbol: "kNN",
    kind: "Classifier",
    occurrences: 4,
    max_fitness: 0.9,
    max_eval_time: 0.2,
    mean_eval_time: 0.1,
    ...partial,
  };
}

export function snapshot(partial: Partial<SnapshotDto> = {}): SnapshotDto {
  const individuals = partial.individuals ?? [entry()];
  const best = individuals[0] ?? entry();
  return {
    individuals,
    best_current: best,
    best_global: best,
    stats: [],
    partition: null,
    candidates: null,
    budget: { interactions_left: 2, generations_left: 10 },
    time_divergence: [
      [0, 0.0, 0.0],
      [1, 0.4, 0.5],
    ],
    ...partial,
  };
}

export function candidates(partial: Partial<CandidatesDto> = {}): CandidatesDto {
  return { algorithms: [], hyperparameter_values: [], ...partial };
}
