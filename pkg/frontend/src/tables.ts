/**
 * Candidate tables for the removal checklists.
 *
 * Rows come from the candidate lists the service returned for the current
 * slider position, one row per symbol, in the service's order. Stats are
 * looked up in the same snapshot's stats block. Nothing is recomputed on
 * the client: if the service reports no candidates the tables are empty,
 * whatever the scatter looks like.
 */

import type { SnapshotDto, SymbolStatsDto } from "./types.js";

export interface AlgorithmRow {
  symbol: string;
  /** "Preprocessor" or "Classifier", from the service stats. */
  kind: string;
  occurrences: number;
  maxFitness: number;
  maxEvalTime: number;
  meanEvalTime: number;
}

export interface ValueRow {
  symbol: string;
  /** Owning algorithm, the part of the symbol before "::". */
  algorithm: string;
  occurrences: number;
  maxFitness: number;
  maxEvalTime: number;
  meanEvalTime: number;
}

export interface Tables {
  algorithms: AlgorithmRow[];
  values: ValueRow[];
}

function statsIndex(snapshot: SnapshotDto): Map<string, SymbolStatsDto> {
  return new Map(snapshot.stats.map((s) => [s.symbol, s]));
}

const EMPTY_STATS: Omit<SymbolStatsDto, "symbol" | "kind"> = {
  occurrences: 0,
  max_fitness: 0,
  max_eval_time: 0,
  mean_eval_time: 0,
};

export function buildTables(snapshot: SnapshotDto): Tables {
  const candidates = snapshot.candidates;
  if (candidates === null) {
    return { algorithms: [], values: [] };
  }
  const stats = statsIndex(snapshot);

  const algorithms: AlgorithmRow[] = candidates.algorithms.map((symbol) => {
    const s = stats.get(symbol);
    return {
      symbol,
      kind: s?.kind ?? "",
      occurrences: s?.occurrences ?? EMPTY_STATS.occurrences,
      maxFitness: s?.max_fitness ?? EMPTY_STATS.max_fitness,
      maxEvalTime: s?.max_eval_time ?? EMPTY_STATS.max_eval_time,
      meanEvalTime: s?.mean_eval_time ?? EMPTY_STATS.mean_eval_time,
    };
  });

  const values: ValueRow[] = candidates.hyperparameter_values.map((symbol) => {
    const s = stats.get(symbol);
    const sep = symbol.indexOf("::");
    return {
      symbol,
      algorithm: sep >= 0 ? symbol.slice(0, sep) : symbol,
      occurrences: s?.occurrences ?? EMPTY_STATS.occurrences,
      maxFitness: s?.max_fitness ?? EMPTY_STATS.max_fitness,
      maxEvalTime: s?.max_eval_time ?? EMPTY_STATS.max_eval_time,
      meanEvalTime: s?.mean_eval_time ?? EMPTY_STATS.mean_eval_time,
    };
  });

  return { algorithms, values };
}
