export const KINDS = [
  "popularity",
  "cosine-content",
  "item-knn",
  "session-knn",
  "bpr-mf",
  "item2vec",
];

export function weightsCsv(rows: number): string {
  const lines = ["iteration,model_id," + KINDS.join(",")];
  for (let i = 0; i < rows; i++) {
    const drift = i / Math.max(1, rows - 1);
    const weights = [
      (1 / 6) * (1 + drift),
      (1 / 6) * (1 - 0.4 * drift),
      1 / 6,
      (1 / 6) * (1 - 0.2 * drift),
      (1 / 6) * (1 - 0.3 * drift),
      (1 / 6) * (1 - 0.1 * drift),
    ];
    const total = weights.reduce((a, b) => a + b, 0);
    lines.push(`${i},global,` + weights.map((w) => String(w / total)).join(","));
  }
  return lines.join("\n") + "\n";
}

export const SUMMARY_HEADER = "variant,behaviour,events,recommendations,clicks,ctr";

export function summaryCsv(): string {
  const lines = [SUMMARY_HEADER];
  const variants = ["global-only", "full-personal", "hybrid"];
  const behaviours = ["stat08", "stat06", "lin0901"];
  let ctr = 0.1;
  for (const variant of variants) {
    for (const behaviour of behaviours) {
      lines.push(`${variant},${behaviour},5000,5000,${Math.round(5000 * ctr)},${ctr}`);
      ctr += 0.01;
    }
  }
  return lines.join("\n") + "\n";
}
