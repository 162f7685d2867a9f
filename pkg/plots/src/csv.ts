/**
 * Strict CSV reading for the experiment exports.
 *
 * The runner writes plain unquoted CSV, so schema problems here almost
 * always mean the wrong file was passed in. Every error names the file
 * and, where it applies, the offending column or line.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

/** Raised for anything wrong with an input file; the CLI turns it into exit 1. */
export class DataError extends Error {}

export interface Table {
  columns: string[];
  rows: string[][];
}

export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    const code = (err as NodeJS.ErrnoException).code ?? "unreadable";
    throw new DataError(`${path}: cannot read file (${code})`);
  }
  if (text.trim() === "") {
    throw new DataError(`${path}: file is empty`);
  }
  const parsed = Papa.parse<string[]>(text.trim(), { delimiter: ",", skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    const line = first.row === undefined ? "?" : String(first.row + 1);
    throw new DataError(`${path}: malformed CSV at line ${line}: ${first.message}`);
  }
  const [columns, ...rows] = parsed.data;
  if (rows.length === 0) {
    throw new DataError(`${path}: no data rows`);
  }
  rows.forEach((row, i) => {
    if (row.length !== columns.length) {
      throw new DataError(
        `${path}: line ${i + 2} has ${row.length} cells, expected ${columns.length}`
      );
    }
  });
  return { columns, rows };
}

/** Indices of the named columns, in order; missing ones raise by name. */
export function requireColumns(table: Table, path: string, names: string[]): number[] {
  return names.map((name) => {
    const at = table.columns.indexOf(name);
    if (at < 0) {
      throw new DataError(`${path}: missing column '${name}'`);
    }
    return at;
  });
}

export function numeric(cell: string, path: string, line: number, column: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new DataError(`${path}: line ${line}: column '${column}' is not numeric: '${cell}'`);
  }
  return value;
}
