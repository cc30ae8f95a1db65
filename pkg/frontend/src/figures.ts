/**
 * Publication-style figures over the experiment CSV schemas.
 *
 * u_curve    - median iterations vs update strength, one line per n, log x.
 * loglog_n   - median iterations at the best strength per n on log-log axes,
 *              with the fitted slope against n*ln(n) in the legend.
 * hitting    - histogram of displacement hitting times stacked by outcome,
 *              a normal-CDF reference curve and the e-based tail-bound marker.
 */

import { Table, numeric, requireColumns, requireSchema } from "./csv.js";
import { fmt, linearFit, linearTicks, logTicks, median, mean, normalCdf, std } from "./stats.js";
import {
  PALETTE,
  Scene,
  caption,
  drawAxes,
  linearScale,
  logScale,
  plotFrame,
} from "./svg.js";

const SWEEP_COLUMNS = [
  "algo", "n", "strength", "trial", "seed", "iterations", "evaluations",
  "lower_hits", "upper_hits", "censored",
];
const HITTING_COLUMNS = ["mode", "algo", "param", "s", "alpha", "trial", "T", "outcome"];

interface Cell {
  n: number;
  strength: number;
  median: number;
}

export function sweepCells(table: Table): Cell[] {
  requireSchema(table, "sweep-v1");
  requireColumns(table, SWEEP_COLUMNS);
  const groups = new Map<string, { n: number; strength: number; values: number[] }>();
  for (const row of table.rows) {
    const n = numeric(row, "n");
    const strength = numeric(row, "strength");
    const key = `${n}|${strength}`;
    if (!groups.has(key)) groups.set(key, { n, strength, values: [] });
    groups.get(key)!.values.push(numeric(row, "iterations"));
  }
  const cells = [...groups.values()].map((g) => ({
    n: g.n,
    strength: g.strength,
    median: median(g.values),
  }));
  cells.sort((a, b) => a.n - b.n || a.strength - b.strength);
  return cells;
}

export function uCurve(table: Table): string {
  const cells = sweepCells(table);
  const scene = new Scene();
  const frame = plotFrame();
  const strengths = cells.map((c) => c.strength);
  const medians = cells.map((c) => c.median);
  const x = logScale(Math.min(...strengths) / 1.2, Math.max(...strengths) * 1.2,
    frame.x0, frame.x1);
  const yMax = Math.max(...medians) * 1.08;
  const y = linearScale(0, yMax, frame.y0, frame.y1);

  drawAxes(
    scene, frame,
    logTicks(Math.min(...strengths) / 1.2, Math.max(...strengths) * 1.2).map(
      (t) => [t, fmt(t)] as [number, string]),
    linearTicks(0, yMax).map((t) => [t, fmt(t)] as [number, string]),
    "update strength (1/K or rho)", "median iterations", x, y,
  );

  const byN = new Map<number, Cell[]>();
  for (const cell of cells) {
    if (!byN.has(cell.n)) byN.set(cell.n, []);
    byN.get(cell.n)!.push(cell);
  }
  let series = 0;
  for (const [n, group] of [...byN.entries()].sort((a, b) => a[0] - b[0])) {
    const colour = PALETTE[series % PALETTE.length];
    const points = group.map(
      (c) => [x(c.strength), y(c.median)] as [number, number]);
    if (points.length > 1) scene.polyline(points, colour);
    for (const [px, py] of points) scene.circle(px, py, 3, colour);
    scene.text(frame.x1 - 8, frame.y1 + 16 + 16 * series, `n=${fmt(n)}`, {
      anchor: "end", fill: colour,
    });
    series += 1;
  }
  caption(scene, table.source, table.schema);
  return scene.render();
}

export interface ScalingPoint {
  n: number;
  median: number;
}

/** Median at the strength with the smallest median, per problem size. */
export function bestStrengthPoints(table: Table): ScalingPoint[] {
  const cells = sweepCells(table);
  const best = new Map<number, Cell>();
  for (const cell of cells) {
    const current = best.get(cell.n);
    if (current === undefined || cell.median < current.median) best.set(cell.n, cell);
  }
  return [...best.values()]
    .map((c) => ({ n: c.n, median: c.median }))
    .sort((a, b) => a.n - b.n);
}

/** Least-squares slope of log(median) against log(n * ln n). */
export function fitSlopeVsNLogN(points: ScalingPoint[]): number {
  const xs = points.map((p) => Math.log(p.n * Math.log(p.n)));
  const ys = points.map((p) => Math.log(p.median));
  return linearFit(xs, ys).slope;
}

export function loglogN(table: Table): string {
  const points = bestStrengthPoints(table);
  const scene = new Scene();
  const frame = plotFrame();
  const ns = points.map((p) => p.n);
  const meds = points.map((p) => p.median);
  const x = logScale(Math.min(...ns) / 1.2, Math.max(...ns) * 1.2, frame.x0, frame.x1);
  const y = logScale(Math.min(...meds) / 1.5, Math.max(...meds) * 1.5, frame.y0, frame.y1);

  drawAxes(
    scene, frame,
    logTicks(Math.min(...ns) / 1.2, Math.max(...ns) * 1.2).map(
      (t) => [t, fmt(t)] as [number, string]),
    logTicks(Math.min(...meds) / 1.5, Math.max(...meds) * 1.5).map(
      (t) => [t, fmt(t)] as [number, string]),
    "problem size n", "median iterations at best strength", x, y,
  );

  if (points.length > 1) {
    const xs = points.map((p) => Math.log(p.n * Math.log(p.n)));
    const ys = points.map((p) => Math.log(p.median));
    const fit = linearFit(xs, ys);
    const curve = points.map((p) => {
      const predicted = Math.exp(fit.intercept + fit.slope * Math.log(p.n * Math.log(p.n)));
      return [x(p.n), y(predicted)] as [number, number];
    });
    scene.polyline(curve, "#999999", 1);
    scene.text(frame.x0 + 10, frame.y1 + 16,
      `fitted slope ${fmt(Number(fit.slope.toFixed(4)))} vs n ln n`, { fill: "#555555" });
  } else {
    scene.text(frame.x0 + 10, frame.y1 + 16, "single point (no fit)", { fill: "#555555" });
  }
  for (const p of points) scene.circle(x(p.n), y(p.median), 4, PALETTE[0]);
  caption(scene, table.source, table.schema);
  return scene.render();
}

const OUTCOME_ORDER = ["REACHED_NEG", "REACHED_POS", "BORDER", "CENSORED"];
const OUTCOME_COLOURS: Record<string, string> = {
  REACHED_NEG: "#d62728",
  REACHED_POS: "#ff7f0e",
  BORDER: "#9467bd",
  CENSORED: "#1f77b4",
};

export function tailBound(algo: string, alpha: number): number {
  const denom = algo === "mmas" ? 16 : 4;
  return 1 - Math.exp(-1 / (denom * alpha));
}

export function hitting(table: Table): string {
  requireSchema(table, "hitting-v1");
  requireColumns(table, HITTING_COLUMNS);
  const times = table.rows.map((r) => numeric(r, "T"));
  const outcomes = table.rows.map((r) => r.outcome);
  const alpha = numeric(table.rows[0], "alpha");
  const algo = table.rows[0].algo;
  const distinct = new Set(outcomes);
  if (distinct.size === 1 && distinct.has("CENSORED")) {
    console.error(`warning: ${table.source}: every trial censored at the horizon`);
  }

  const scene = new Scene();
  const frame = plotFrame();
  const tMax = Math.max(...times);
  const binCount = Math.min(30, Math.max(1, tMax + 1));
  const width = Math.max(1, Math.ceil((tMax + 1) / binCount));
  const bins = Math.ceil((tMax + 1) / width);
  const counts = new Map<string, number[]>();
  for (const outcome of OUTCOME_ORDER) counts.set(outcome, new Array(bins).fill(0));
  for (let i = 0; i < times.length; i++) {
    const bin = Math.min(bins - 1, Math.floor(times[i] / width));
    const bucket = counts.get(outcomes[i]) ?? counts.get("CENSORED")!;
    bucket[bin] += 1;
  }
  const totals = new Array(bins).fill(0);
  for (const outcome of OUTCOME_ORDER) {
    const c = counts.get(outcome)!;
    for (let b = 0; b < bins; b++) totals[b] += c[b];
  }
  const trials = times.length;
  const maxCount = Math.max(...totals, 1);

  const x = linearScale(0, bins * width, frame.x0, frame.x1);
  const y = linearScale(0, maxCount * 1.1, frame.y0, frame.y1);

  drawAxes(
    scene, frame,
    linearTicks(0, bins * width).map((t) => [t, fmt(t)] as [number, string]),
    linearTicks(0, maxCount * 1.1).map((t) => [t, fmt(t)] as [number, string]),
    "iterations until displacement or border", "trials", x, y,
  );

  for (let b = 0; b < bins; b++) {
    let stack = 0;
    for (const outcome of OUTCOME_ORDER) {
      const count = counts.get(outcome)![b];
      if (count === 0) continue;
      const x0 = x(b * width) + 1;
      const x1 = x((b + 1) * width) - 1;
      scene.rect(x0, y(stack + count), Math.max(1, x1 - x0), y(stack) - y(stack + count),
        OUTCOME_COLOURS[outcome] ?? "#777777");
      stack += count;
    }
  }
  let legendRow = 0;
  for (const outcome of OUTCOME_ORDER) {
    const total = counts.get(outcome)!.reduce((a, b) => a + b, 0);
    if (total === 0) continue;
    scene.text(frame.x1 - 8, frame.y1 + 16 + 16 * legendRow,
      `${outcome.toLowerCase()} (${total})`,
      { anchor: "end", fill: OUTCOME_COLOURS[outcome], size: 11 });
    legendRow += 1;
  }

  // normal reference: CDF with the sample mean and deviation, count-scaled
  const mu = mean(times);
  const sigma = std(times);
  if (sigma > 0) {
    const curve: Array<[number, number]> = [];
    for (let i = 0; i <= 100; i++) {
      const t = (i / 100) * bins * width;
      curve.push([x(t), y(normalCdf((t - mu) / sigma) * maxCount)]);
    }
    scene.polyline(curve, "#555555", 1);
    scene.text(frame.x0 + 10, frame.y1 + 32, "normal CDF reference (count-scaled)",
      { fill: "#555555", size: 11 });
  }

  // e-based tail-bound marker on the trial-fraction scale
  const bound = tailBound(algo, alpha);
  const yBound = y((bound * trials / trials) * maxCount);
  scene.line(frame.x0, yBound, frame.x1, yBound, "#d62728", "6,4");
  scene.text(frame.x0 + 10, yBound - 6, `bound ${bound.toFixed(3)}`, {
    fill: "#d62728", size: 11,
  });
  caption(scene, table.source, table.schema);
  return scene.render();
}
