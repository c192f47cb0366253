/**
 * Time divergence panel: cumulative evaluation time of this run per
 * generation, against the baseline timeline when the session has one.
 * Model first, thin SVG renderer second, same split as the scatter.
 */

export interface SeriesPoint {
  generation: number;
  cumulative: number;
}

export interface DivergenceModel {
  run: SeriesPoint[];
  baseline: SeriesPoint[];
}

export function buildDivergenceModel(
  divergence: readonly (readonly [number, number, number | null])[],
): DivergenceModel {
  const run: SeriesPoint[] = [];
  const baseline: SeriesPoint[] = [];
  for (const [generation, cumulative, base] of divergence) {
    run.push({ generation, cumulative });
    if (base !== null) baseline.push({ generation, cumulative: base });
  }
  return { run, baseline };
}

const WIDTH = 640;
const HEIGHT = 180;
const MARGIN = { top: 10, right: 16, bottom: 26, left: 52 };

function path(points: SeriesPoint[], x: (v: number) => number, y: (v: number) => number): string {
  return points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.generation)},${y(p.cumulative)}`)
    .join("");
}

export function renderDivergenceSvg(model: DivergenceModel): string {
  const all = [...model.run, ...model.baseline];
  if (all.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" class="divergence"></svg>`;
  }
  const gens = all.map((p) => p.generation);
  const times = all.map((p) => p.cumulative);
  const gLo = Math.min(...gens);
  const gHi = Math.max(...gens);
  const tHi = Math.max(...times, 1e-9);

  const x = (g: number) =>
    MARGIN.left + ((g - gLo) / Math.max(gHi - gLo, 1)) * (WIDTH - MARGIN.left - MARGIN.right);
  const y = (t: number) =>
    HEIGHT - MARGIN.bottom - (t / tHi) * (HEIGHT - MARGIN.top - MARGIN.bottom);

  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" class="divergence">`,
  ];
  if (model.baseline.length > 0) {
    parts.push(`<path d="${path(model.baseline, x, y)}" class="line baseline" fill="none"/>`);
  }
  parts.push(`<path d="${path(model.run, x, y)}" class="line run" fill="none"/>`);
  parts.push(
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 4}" class="axis-label" text-anchor="middle">generation</text>`,
    `<text x="14" y="${HEIGHT / 2}" class="axis-label" text-anchor="middle" transform="rotate(-90 14 ${HEIGHT / 2})">cumulative eval time (s)</text>`,
  );
  parts.push("</svg>");
  return parts.join("");
}
