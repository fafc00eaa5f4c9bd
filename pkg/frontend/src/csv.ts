import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface Table {
  rows: Record<string, string>[];
  columns: string[];
  sha256: string;
  path: string;
}

/** Load a CSV and fail fast when required columns are missing. */
export function loadCsv(path: string, required: string[]): Table {
  const bytes = readFileSync(path);
  const parsed = Papa.parse<Record<string, string>>(bytes.toString("utf-8").trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(
        `${path}: missing column '${col}' (have: ${columns.join(", ")})`,
      );
    }
  }
  return {
    rows: parsed.data,
    columns,
    sha256: createHash("sha256").update(bytes).digest("hex"),
    path,
  };
}

export function num(row: Record<string, string>, col: string): number {
  const v = Number(row[col]);
  return v;
}

/** Distinct values of a column, in first-appearance order. */
export function distinct(table: Table, col: string): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const row of table.rows) {
    const v = row[col];
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out;
}
