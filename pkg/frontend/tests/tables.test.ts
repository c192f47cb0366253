import { describe, expect, test } from "vitest";

import { buildTables } from "../src/tables.js";
import { candidates, snapshot, stats } from "./fixtures.js";

describe("candidate tables", () => {
  test("no candidates means empty tables", () => {
    const tables = buildTables(snapshot({ candidates: null }));
    expect(tables.algorithms).toEqual([]);
    expect(tables.values).toEqual([]);

    const explicit = buildTables(snapshot({ candidates: candidates() }));
    expect(explicit.algorithms).toEqual([]);
    expect(explicit.values).toEqual([]);
  });

  test("rows mirror the candidate lists in service order", () => {
    const snap = snapshot({
      stats: [
        stats({ symbol: "kNN", kind: "Classifier" }),
        stats({ symbol: "pca", kind: "Preprocessor", occurrences: 2 }),
        stats({ symbol: "kNN::weights=uniform", kind: "HyperparamValue", occurrences: 3 }),
      ],
      candidates: candidates({
        algorithms: ["pca", "kNN"],
        hyperparameter_values: ["kNN::weights=uniform"],
      }),
    });
    const tables = buildTables(snap);
    expect(tables.algorithms.map((r) => r.symbol)).toEqual(["pca", "kNN"]);
    expect(tables.algorithms.map((r) => r.kind)).toEqual(["Preprocessor", "Classifier"]);
    expect(tables.values).toHaveLength(1);
    expect(tables.values[0]).toMatchObject({
      symbol: "kNN::weights=uniform",
      algorithm: "kNN",
      occurrences: 3,
    });
  });

  test("stat columns come straight from the service stats block", () => {
    const snap = snapshot({
      stats: [
        stats({
          symbol: "mlpClassifier",
          occurrences: 7,
          max_fitness: 0.61,
          max_eval_time: 1.25,
          mean_eval_time: 0.8,
        }),
      ],
      candidates: candidates({ algorithms: ["mlpClassifier"] }),
    });
    const [row] = buildTables(snap).algorithms;
    expect(row).toEqual({
      symbol: "mlpClassifier",
      kind: "Classifier",
      occurrences: 7,
      maxFitness: 0.61,
      maxEvalTime: 1.25,
      meanEvalTime: 0.8,
    });
  });

  test("a symbol without stats falls back to zeros instead of inventing numbers", () => {
    const snap = snapshot({
      stats: [],
      candidates: candidates({ algorithms: ["lda"] }),
    });
    const [row] = buildTables(snap).algorithms;
    expect(row).toMatchObject({ symbol: "lda", occurrences: 0, maxFitness: 0 });
  });
});
