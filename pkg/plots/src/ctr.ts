/**
 * Grouped-bar chart of click-through rates from a matrix summary.
 *
 * Groups are behaviour models, bars within a group are variants, bar
 * height is ctr. Row order in the file decides group and bar order, so
 * the chart is deterministic for a given input.
 */

import { numeric, readTable, requireColumns, Table } from "./csv.js";
import { axes, escapeXml, legend, Layout, linearScale, openSvg, PALETTE, ticks } from "./svg.js";

export interface CtrCell {
  variant: string;
  behaviour: string;
  ctr: number;
}

export function parseSummary(table: Table, path: string): CtrCell[] {
  const [variantAt, behaviourAt, ctrAt] = requireColumns(table, path, [
    "variant",
    "behaviour",
    "ctr",
  ]);
  return table.rows.map((row, i) => ({
    variant: row[variantAt],
    behaviour: row[behaviourAt],
    ctr: numeric(row[ctrAt], path, i + 2, "ctr"),
  }));
}

function firstSeen(values: string[]): string[] {
  const seen: string[] = [];
  for (const value of values) {
    if (!seen.includes(value)) seen.push(value);
  }
  return seen;
}

const LAYOUT: Layout = {
  width: 880,
  height: 440,
  margin: { top: 44, right: 180, bottom: 64, left: 64 },
};

export function ctrGridChart(cells: CtrCell[]): string {
  const { margin, width, height } = LAYOUT;
  const behaviours = firstSeen(cells.map((c) => c.behaviour));
  const variants = firstSeen(cells.map((c) => c.variant));
  const yMax = Math.max(0.01, ...cells.map((c) => c.ctr)) * 1.15;
  const yScale = linearScale(0, yMax, height - margin.bottom, margin.top);
  const y0 = height - margin.bottom;

  const plotWidth = width - margin.left - margin.right;
  const groupWidth = plotWidth / behaviours.length;
  const barWidth = Math.min(48, (groupWidth * 0.72) / variants.length);

  const parts = openSvg(LAYOUT, "Click-through rate by variant and behaviour");
  parts.push(...axes(LAYOUT, ticks(0, yMax, 6), yScale, "ctr"));

  behaviours.forEach((behaviour, g) => {
    const groupLeft = margin.left + g * groupWidth;
    const cluster = variants.length * barWidth;
    const start = groupLeft + (groupWidth - cluster) / 2;
    variants.forEach((variant, b) => {
      const cell = cells.find((c) => c.behaviour === behaviour && c.variant === variant);
      if (!cell) return;
      const x = start + b * barWidth;
      const top = yScale(cell.ctr);
      parts.push(
        `<rect class="bar" x="${x.toFixed(2)}" y="${top.toFixed(2)}" width="${(barWidth * 0.88).toFixed(2)}" height="${(y0 - top).toFixed(2)}" fill="${PALETTE[b % PALETTE.length]}"/>`,
        `<text x="${(x + barWidth * 0.44).toFixed(2)}" y="${(top - 5).toFixed(2)}" text-anchor="middle" font-size="10" fill="#374151">${cell.ctr.toFixed(4)}</text>`
      );
    });
    parts.push(
      `<text x="${(groupLeft + groupWidth / 2).toFixed(2)}" y="${y0 + 20}" text-anchor="middle" font-size="12" fill="#111">${escapeXml(behaviour)}</text>`
    );
  });

  parts.push(
    `<text x="${(margin.left + width - margin.right) / 2}" y="${height - 14}" text-anchor="middle" font-size="12" fill="#111">behaviour model</text>`
  );
  parts.push(...legend(LAYOUT, variants, PALETTE));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function renderCtrGrid(path: string): string {
  return ctrGridChart(parseSummary(readTable(path), path));
}
