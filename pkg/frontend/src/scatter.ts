/**
 * Scatter plot of the paused population: evaluation time on x, fitness on
 * y, one point per individual, colored by classifier. The model is plain
 * data so legend, threshold lines, and scale decisions are testable; the
 * SVG renderer below is a thin projection of that model.
 */

import type { SnapshotDto, ThresholdsDto } from "./types.js";

export interface ScatterPoint {
  x: number;
  y: number;
  workflow: string;
  classifier: string;
  failed: boolean;
  color: string;
}

export interface LegendEntry {
  classifier: string;
  color: string;
  hidden: boolean;
}

export interface ThresholdLine {
  /** "vertical" sits at x = value (time), "horizontal" at y = value. */
  orientation: "vertical" | "horizontal";
  value: number;
}

export interface ScatterModel {
  points: ScatterPoint[];
  legend: LegendEntry[];
  lines: ThresholdLine[];
  xScale: "linear" | "log";
  xDomain: [number, number];
  yDomain: [number, number];
}

const PALETTE = [
  "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951",
  "#ff8ab7", "#a463f2", "#97bbf5", "#9c6b4e", "#9498a0",
];

function colorFor(classifier: string, order: string[]): string {
  const idx = order.indexOf(classifier);
  return PALETTE[((idx % PALETTE.length) + PALETTE.length) % PALETTE.length]!;
}

function domainOf(values: number[], fallback: [number, number]): [number, number] {
  if (values.length === 0) return fallback;
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

/**
 * Build the plot model. Hidden classifiers keep their legend entry (marked
 * hidden) but contribute no points. The time axis switches to a log scale
 * when the visible spread exceeds two orders of magnitude.
 */
export function buildScatterModel(
  snapshot: SnapshotDto,
  thresholds: ThresholdsDto,
  hidden: ReadonlySet<string>,
): ScatterModel {
  const classifiers = [...new Set(snapshot.individuals.map((e) => e.classifier))].sort();
  const legend: LegendEntry[] = classifiers.map((c) => ({
    classifier: c,
    color: colorFor(c, classifiers),
    hidden: hidden.has(c),
  }));

  const visible = snapshot.individuals.filter((e) => !hidden.has(e.classifier));
  const points: ScatterPoint[] = visible.map((e) => ({
    x: e.eval_time,
    y: e.fitness,
    workflow: e.workflow,
    classifier: e.classifier,
    failed: e.failed,
    color: colorFor(e.classifier, classifiers),
  }));

  const lines: ThresholdLine[] = [];
  if (thresholds.t_time !== undefined && thresholds.t_time !== null) {
    lines.push({ orientation: "vertical", value: thresholds.t_time });
  }
  if (thresholds.t_acc !== undefined && thresholds.t_acc !== null) {
    lines.push({ orientation: "horizontal", value: thresholds.t_acc });
  }

  const times = points.map((p) => p.x);
  const positive = times.filter((t) => t > 0);
  let xScale: "linear" | "log" = "linear";
  if (positive.length > 1) {
    const ratio = Math.max(...positive) / Math.min(...positive);
    if (ratio > 100) xScale = "log";
  }
  const xDomain = domainOf(xScale === "log" ? positive : times, [0, 1]);
  const yDomain = domainOf(points.map((p) => p.y), [0, 1]);
  return { points, legend, lines, xScale, xDomain, yDomain };
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 12, right: 16, bottom: 34, left: 52 };

function escapeXml(s: string): string {
  return s
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function makeScale(
  domain: [number, number],
  range: [number, number],
  log: boolean,
): (v: number) => number {
  const [d0, d1] = log ? [Math.log10(domain[0]), Math.log10(domain[1])] : domain;
  const span = d1 - d0 || 1;
  return (v: number) => {
    const t = ((log ? Math.log10(Math.max(v, domain[0])) : v) - d0) / span;
    return range[0] + t * (range[1] - range[0]);
  };
}

function ticks(domain: [number, number], n: number, log: boolean): number[] {
  if (log) {
    const lo = Math.ceil(Math.log10(domain[0]));
    const hi = Math.floor(Math.log10(domain[1]));
    const out: number[] = [];
    for (let e = lo; e <= hi; e++) out.push(10 ** e);
    return out.length > 0 ? out : [domain[0], domain[1]];
  }
  const [lo, hi] = domain;
  const out: number[] = [];
  for (let i = 0; i <= n; i++) out.push(lo + ((hi - lo) * i) / n);
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(0);
  return String(Math.round(v * 1000) / 1000);
}

/**
 * Render the model to an SVG string. The caller owns zoom: `viewBox`
 * describes the full plot, and the app layer rewrites it on wheel events.
 */
export function renderScatterSvg(model: ScatterModel): string {
  const x = makeScale(
    model.xDomain,
    [MARGIN.left, WIDTH - MARGIN.right],
    model.xScale === "log",
  );
  const y = makeScale(model.yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top], false);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `data-xscale="${model.xScale}" class="scatter">`,
  );

  for (const t of ticks(model.xDomain, 5, model.xScale === "log")) {
    const px = x(t);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" class="grid"/>`,
      `<text x="${px}" y="${HEIGHT - MARGIN.bottom + 16}" class="tick" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(model.yDomain, 5, false)) {
    const py = y(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" class="grid"/>`,
      `<text x="${MARGIN.left - 6}" y="${py + 4}" class="tick" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 4}" class="axis-label" text-anchor="middle">evaluation time (s)</text>`,
    `<text x="14" y="${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2}" class="axis-label" text-anchor="middle" transform="rotate(-90 14 ${(MARGIN.top + HEIGHT - MARGIN.bottom) / 2})">fitness</text>`,
  );

  for (const line of model.lines) {
    if (line.orientation === "vertical") {
      const px = x(line.value);
      parts.push(
        `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" class="threshold" data-threshold="t_time"/>`,
      );
    } else {
      const py = y(line.value);
      parts.push(
        `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" class="threshold" data-threshold="t_acc"/>`,
      );
    }
  }

  for (const p of model.points) {
    const title = escapeXml(p.workflow);
    parts.push(
      `<circle cx="${x(p.x)}" cy="${y(p.y)}" r="4" fill="${p.color}" ` +
        `fill-opacity="${p.failed ? 0.25 : 0.85}" data-classifier="${escapeXml(p.classifier)}">` +
        `<title>${title}</title></circle>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}
