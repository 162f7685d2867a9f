import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { run } from "../src/cli.js";
import { summaryCsv, weightsCsv } from "./fixtures.js";

interface Invocation {
  code: number;
  errors: string[];
}

function invoke(argv: string[]): Invocation {
  const errors: string[] = [];
  const code = run(argv, (line) => errors.push(line));
  return { code, errors };
}

function experimentDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
  writeFileSync(join(dir, "weights_global.csv"), weightsCsv(120), "utf-8");
  writeFileSync(join(dir, "summary.csv"), summaryCsv(), "utf-8");
  return dir;
}

describe("run", () => {
  it("writes a weight-trajectory SVG and leaves inputs untouched", () => {
    const dir = experimentDir();
    const before = readFileSync(join(dir, "weights_global.csv"));
    const out = join(dir, "weights.svg");
    const { code, errors } = invoke(["--input-dir", dir, "--kind", "weights", "--out", out]);
    expect(errors).toEqual([]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("</svg>");
    expect(readFileSync(join(dir, "weights_global.csv")).equals(before)).toBe(true);
  });

  it("writes a ctr grid SVG", () => {
    const dir = experimentDir();
    const before = readFileSync(join(dir, "summary.csv"));
    const out = join(dir, "ctr.svg");
    const { code } = invoke(["--input-dir", dir, "--kind", "ctr", "--out", out]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain('<rect class="bar"');
    expect(readFileSync(join(dir, "summary.csv")).equals(before)).toBe(true);
  });

  it("fails with a message when the input file is missing", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    const { code, errors } = invoke([
      "--input-dir",
      dir,
      "--kind",
      "weights",
      "--out",
      join(dir, "out.svg"),
    ]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/cannot read file/);
  });

  it("fails on an empty input file", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    writeFileSync(join(dir, "summary.csv"), "", "utf-8");
    const { code, errors } = invoke([
      "--input-dir",
      dir,
      "--kind",
      "ctr",
      "--out",
      join(dir, "out.svg"),
    ]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/file is empty/);
  });

  it("reports schema errors by column name", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-cli-"));
    writeFileSync(join(dir, "summary.csv"), "variant,behaviour,rate\nhybrid,stat08,0.1\n", "utf-8");
    const { code, errors } = invoke([
      "--input-dir",
      dir,
      "--kind",
      "ctr",
      "--out",
      join(dir, "out.svg"),
    ]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/missing column 'ctr'/);
  });

  it("rejects unknown kinds", () => {
    const dir = experimentDir();
    const { code, errors } = invoke([
      "--input-dir",
      dir,
      "--kind",
      "pie",
      "--out",
      join(dir, "out.svg"),
    ]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/unknown kind 'pie'/);
  });

  it("requires all three flags", () => {
    const { code, errors } = invoke(["--kind", "weights"]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/required/);
  });

  it("rejects unknown flags", () => {
    const { code, errors } = invoke(["--input-dir", "x", "--style", "dark"]);
    expect(code).toBe(1);
    expect(errors[0]).toMatch(/error:/);
  });
});
