/**
 * Weight-trajectory line chart.
 *
 * Input schema (written by the experiment runner): iteration, model_id,
 * then one numeric column per recommender kind. One line per recommender;
 * a single data row degenerates to one marker per recommender.
 */

import { DataError, numeric, readTable, requireColumns, Table } from "./csv.js";
import { axes, legend, Layout, linearScale, openSvg, PALETTE, ticks } from "./svg.js";

export interface TrajectoryData {
  modelId: string;
  kinds: string[];
  iterations: number[];
  series: number[][]; // series[kind][point]
}

export function parseTrajectory(table: Table, path: string): TrajectoryData {
  const [iterationAt, modelAt] = requireColumns(table, path, ["iteration", "model_id"]);
  const kinds = table.columns.filter((_, i) => i !== iterationAt && i !== modelAt);
  if (kinds.length === 0) {
    throw new DataError(`${path}: no recommender columns after iteration and model_id`);
  }
  const kindAt = kinds.map((kind) => table.columns.indexOf(kind));

  // several models can share the schema; a single chart shows the first one
  const modelId = table.rows[0][modelAt];
  const rows = table.rows.filter((row) => row[modelAt] === modelId);

  const iterations: number[] = [];
  const series: number[][] = kinds.map(() => []);
  rows.forEach((row, i) => {
    const line = i + 2;
    iterations.push(numeric(row[iterationAt], path, line, "iteration"));
    kinds.forEach((kind, s) => {
      series[s].push(numeric(row[kindAt[s]], path, line, kind));
    });
  });
  return { modelId, kinds, iterations, series };
}

const LAYOUT: Layout = {
  width: 880,
  height: 440,
  margin: { top: 44, right: 180, bottom: 56, left: 64 },
};

export function trajectoryChart(data: TrajectoryData): string {
  const { margin, width, height } = LAYOUT;
  const xMin = Math.min(...data.iterations);
  const xMax = Math.max(...data.iterations);
  const yMax = Math.max(0.01, ...data.series.flat()) * 1.08;
  const xScale = linearScale(xMin, xMax, margin.left, width - margin.right);
  const yScale = linearScale(0, yMax, height - margin.bottom, margin.top);

  const parts = openSvg(LAYOUT, `Vote weights over replay (${data.modelId})`);
  parts.push(...axes(LAYOUT, ticks(0, yMax, 6), yScale, "vote weight"));

  for (const tick of ticks(xMin, xMax, 8)) {
    const x = xScale(tick);
    parts.push(
      `<text x="${x.toFixed(2)}" y="${height - margin.bottom + 18}" text-anchor="middle" font-size="11" fill="#374151">${tick}</text>`
    );
  }
  parts.push(
    `<text x="${(margin.left + width - margin.right) / 2}" y="${height - 14}" text-anchor="middle" font-size="12" fill="#111">replay iteration</text>`
  );

  data.series.forEach((values, s) => {
    const color = PALETTE[s % PALETTE.length];
    if (values.length === 1) {
      const cx = xScale(data.iterations[0]).toFixed(2);
      const cy = yScale(values[0]).toFixed(2);
      parts.push(`<circle cx="${cx}" cy="${cy}" r="4" fill="${color}"/>`);
      return;
    }
    const points = values
      .map((v, i) => `${xScale(data.iterations[i]).toFixed(2)},${yScale(v).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.6"/>`
    );
  });

  parts.push(...legend(LAYOUT, data.kinds, PALETTE));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function renderWeights(path: string): string {
  return trajectoryChart(parseTrajectory(readTable(path), path));
}
