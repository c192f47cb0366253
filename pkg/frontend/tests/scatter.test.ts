import { describe, expect, test } from "vitest";

import { buildScatterModel, renderScatterSvg } from "../src/scatter.js";
import { entry, snapshot } from "./fixtures.js";

const NONE = new Set<string>();

describe("scatter model", () => {
  test("three distinct classifiers yield exactly three legend entries", () => {
    const snap = snapshot({
      individuals: [
        entry({ classifier: "kNN" }),
        entry({ classifier: "decisionTree" }),
        entry({ classifier: "kNN" }),
        entry({ classifier: "gaussianNB" }),
      ],
    });
    const model = buildScatterModel(snap, {}, NONE);
    expect(model.legend.map((l) => l.classifier)).toEqual([
      "decisionTree",
      "gaussianNB",
      "kNN",
    ]);
    expect(model.points).toHaveLength(4);
  });

  test("one point per individual, keyed to its workflow", () => {
    const snap = snapshot({
      individuals: [
        entry({ workflow: "a()", fitness: 0.5, eval_time: 0.1 }),
        entry({ workflow: "b()", fitness: 0.7, eval_time: 0.3 }),
      ],
    });
    const model = buildScatterModel(snap, {}, NONE);
    expect(model.points.map((p) => [p.workflow, p.x, p.y])).toEqual([
      ["a()", 0.1, 0.5],
      ["b()", 0.3, 0.7],
    ]);
  });

  test("time threshold 2 becomes a vertical line at x = 2", () => {
    const model = buildScatterModel(snapshot(), { t_time: 2 }, NONE);
    expect(model.lines).toEqual([{ orientation: "vertical", value: 2 }]);
  });

  test("fitness threshold becomes a horizontal line", () => {
    const model = buildScatterModel(snapshot(), { t_acc: 0.75 }, NONE);
    expect(model.lines).toEqual([{ orientation: "horizontal", value: 0.75 }]);
  });

  test("hiding a classifier removes its points and only its points", () => {
    const snap = snapshot({
      individuals: [
        entry({ classifier: "kNN", workflow: "k1" }),
        entry({ classifier: "decisionTree", workflow: "d1" }),
        entry({ classifier: "kNN", workflow: "k2" }),
      ],
    });
    const model = buildScatterModel(snap, {}, new Set(["kNN"]));
    expect(model.points.map((p) => p.workflow)).toEqual(["d1"]);
    const hiddenEntry = model.legend.find((l) => l.classifier === "kNN");
    expect(hiddenEntry?.hidden).toBe(true);
    expect(model.legend).toHaveLength(2);
  });

  test("legend colors are stable under hiding", () => {
    const snap = snapshot({
      individuals: [
        entry({ classifier: "kNN" }),
        entry({ classifier: "decisionTree" }),
      ],
    });
    const before = buildScatterModel(snap, {}, NONE);
    const after = buildScatterModel(snap, {}, new Set(["decisionTree"]));
    const color = (m: typeof before, c: string) =>
      m.legend.find((l) => l.classifier === c)?.color;
    expect(color(after, "kNN")).toBe(color(before, "kNN"));
    expect(color(after, "decisionTree")).toBe(color(before, "decisionTree"));
  });

  test("time axis goes log when times span more than two decades", () => {
    const wide = snapshot({
      individuals: [
        entry({ eval_time: 0.001 }),
        entry({ eval_time: 0.5 }),
      ],
    });
    const narrow = snapshot({
      individuals: [
        entry({ eval_time: 0.01 }),
        entry({ eval_time: 0.5 }),
      ],
    });
    expect(buildScatterModel(wide, {}, NONE).xScale).toBe("log");
    expect(buildScatterModel(narrow, {}, NONE).xScale).toBe("linear");
  });

  test("an empty population still renders", () => {
    const snap = snapshot({ individuals: [] });
    const model = buildScatterModel(snap, {}, NONE);
    expect(model.points).toEqual([]);
    expect(model.legend).toEqual([]);
    const svg = renderScatterSvg(model);
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).not.toContain("<circle");
  });
});

describe("scatter svg", () => {
  test("every point carries its workflow as a hover title", () => {
    const snap = snapshot({
      individuals: [entry({ workflow: "pca(n_components=3)|kNN(n_neighbors=5,weights=uniform)" })],
    });
    const svg = renderScatterSvg(buildScatterModel(snap, {}, NONE));
    expect(svg).toContain("<title>pca(n_components=3)|kNN(n_neighbors=5,weights=uniform)</title>");
  });

  test("threshold lines are tagged by axis", () => {
    const svg = renderScatterSvg(
      buildScatterModel(snapshot(), { t_acc: 0.5, t_time: 0.2 }, NONE),
    );
    expect(svg).toContain('data-threshold="t_time"');
    expect(svg).toContain('data-threshold="t_acc"');
  });

  test("workflow text is escaped", () => {
    const snap = snapshot({ individuals: [entry({ workflow: 'x<&">y', classifier: "c" })] });
    const svg = renderScatterSvg(buildScatterModel(snap, {}, NONE));
    expect(svg).toContain("x&lt;&amp;&quot;&gt;y");
  });
});
