/** Command-line entry: --input-dir DIR --kind weights|ctr --out FILE */

import { writeFileSync } from "node:fs";
import path from "node:path";
import { parseArgs } from "node:util";

import { DataError } from "./csv.js";
import { renderCtrGrid } from "./ctr.js";
import { renderWeights } from "./weights.js";

const USAGE = "usage: dhondt-plots --input-dir DIR --kind weights|ctr --out FILE";

export function run(
  argv: string[],
  log: (line: string) => void = (line) => process.stderr.write(line + "\n")
): number {
  let values: { "input-dir"?: string; kind?: string; out?: string };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        "input-dir": { type: "string" },
        kind: { type: "string" },
        out: { type: "string" },
      },
      strict: true,
    }));
  } catch (err) {
    log(`error: ${(err as Error).message}`);
    log(USAGE);
    return 1;
  }

  const inputDir = values["input-dir"];
  const kind = values.kind;
  const out = values.out;
  if (!inputDir || !kind || !out) {
    log("error: --input-dir, --kind and --out are all required");
    log(USAGE);
    return 1;
  }

  try {
    let svg: string;
    if (kind === "weights") {
      svg = renderWeights(path.join(inputDir, "weights_global.csv"));
    } else if (kind === "ctr") {
      svg = renderCtrGrid(path.join(inputDir, "summary.csv"));
    } else {
      log(`error: unknown kind '${kind}'; expected 'weights' or 'ctr'`);
      return 1;
    }
    writeFileSync(out, svg, "utf-8");
    return 0;
  } catch (err) {
    if (err instanceof DataError) {
      log(`error: ${err.message}`);
      return 1;
    }
    if ((err as NodeJS.ErrnoException).code !== undefined) {
      log(`error: cannot write ${out}: ${(err as NodeJS.ErrnoException).code}`);
      return 1;
    }
    throw err;
  }
}
