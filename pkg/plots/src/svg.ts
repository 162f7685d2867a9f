/** Shared SVG scaffolding: layout, scales, axes, palette. No DOM, no deps. */

export interface Layout {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const PALETTE = [
  "#4363d8",
  "#e6194b",
  "#3cb44b",
  "#f58231",
  "#911eb4",
  "#0e7490",
  "#9a6324",
  "#6b7280",
];

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Linear map from [d0, d1] to [r0, r1]; constant domains map to the midpoint. */
export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number
): (v: number) => number {
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

/** Round tick steps to 1/2/5 times a power of ten. */
function niceStep(rough: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(rough)));
  const base = rough / power;
  if (base <= 1) return power;
  if (base <= 2) return 2 * power;
  if (base <= 5) return 5 * power;
  return 10 * power;
}

export function ticks(min: number, max: number, count: number): number[] {
  if (max <= min) {
    return [min];
  }
  const step = niceStep((max - min) / Math.max(1, count));
  const start = Math.ceil(min / step) * step;
  const out: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    // snap away floating drift so labels stay short
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function formatTick(value: number): string {
  if (Number.isInteger(value)) return String(value);
  const text = value.toPrecision(4);
  return String(Number(text));
}

export function openSvg(layout: Layout, title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" height="${layout.height}" viewBox="0 0 ${layout.width} ${layout.height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${layout.width}" height="${layout.height}" fill="white"/>`,
    `<text x="${layout.width / 2}" y="24" text-anchor="middle" font-size="16" fill="#111">${escapeXml(title)}</text>`,
  ];
}

export function axes(
  layout: Layout,
  yTicks: number[],
  yScale: (v: number) => number,
  yLabel: string
): string[] {
  const { margin, width, height } = layout;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const parts: string[] = [];
  for (const tick of yTicks) {
    const y = yScale(tick);
    parts.push(
      `<line x1="${x0}" y1="${y.toFixed(2)}" x2="${x1}" y2="${y.toFixed(2)}" stroke="#e5e7eb" stroke-width="1"/>`,
      `<text x="${x0 - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-size="11" fill="#374151">${formatTick(tick)}</text>`
    );
  }
  parts.push(
    `<line x1="${x0}" y1="${margin.top}" x2="${x0}" y2="${y0}" stroke="#111" stroke-width="1"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#111" stroke-width="1"/>`,
    `<text x="${14}" y="${(margin.top + y0) / 2}" text-anchor="middle" font-size="12" fill="#111" transform="rotate(-90 14 ${(margin.top + y0) / 2})">${escapeXml(yLabel)}</text>`
  );
  return parts;
}

export function legend(
  layout: Layout,
  labels: string[],
  colors: string[]
): string[] {
  const x = layout.width - layout.margin.right + 16;
  const parts: string[] = [];
  labels.forEach((label, i) => {
    const y = layout.margin.top + 8 + i * 20;
    parts.push(
      `<rect x="${x}" y="${y - 9}" width="12" height="12" fill="${colors[i % colors.length]}"/>`,
      `<text x="${x + 18}" y="${y + 2}" font-size="12" fill="#111">${escapeXml(label)}</text>`
    );
  });
  return parts;
}
