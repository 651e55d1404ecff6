/**
 * Readers for the documented run-directory files.  The CSV schemas are the
 * whole contract with the simulator; nothing else is touched, and a schema
 * mismatch fails loudly with the offending path.
 */

import fs from "node:fs";
import path from "node:path";
import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(file: string, detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
  }
}

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

export function readCsv(file: string, required: string[]): Table {
  if (!fs.existsSync(file)) throw new SchemaError(file, "file not found");
  const text = fs.readFileSync(file, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(file, `parse error: ${parsed.errors[0].message} (row ${parsed.errors[0].row})`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(file, `missing column '${col}' (found: ${columns.join(", ")})`);
    }
  }
  const rows = parsed.data.map((raw, i) => {
    const row: Record<string, number> = {};
    for (const col of columns) {
      const value = Number(raw[col]);
      if (raw[col] === undefined || raw[col] === "" || (Number.isNaN(value) && raw[col] !== "nan")) {
        // non-numeric cells are allowed only in explicitly textual columns
        if (required.includes(col)) {
          throw new SchemaError(file, `non-numeric value '${raw[col]}' in column '${col}', row ${i + 2}`);
        }
        continue;
      }
      row[col] = value;
    }
    return row;
  });
  return { columns, rows };
}

export const ENERGY_COLUMNS = [
  "t", "Ea", "Eb", "frakE", "calE", "E2", "E3",
  "taylor_min", "chord_arc_delta", "holo_Zt", "holo_Za", "at_over_a_sup",
];

export const SNAPSHOT_COLUMNS = ["t", "alpha", "Re_Z", "Im_Z", "Re_Zt", "Im_Zt"];

export const MOLLIFY_COLUMNS = ["eps", "d_eps", "ratio_to_coarser", "delta0", "delta_min"];

export interface RunData {
  energy: Table;
  snapshots: Map<number, Array<{ alpha: number; re: number; im: number }>>;
  summary: { reason?: string; steps?: number } | null;
}

export function readRunDir(runDir: string): RunData {
  const energy = readCsv(path.join(runDir, "energy.csv"), ENERGY_COLUMNS);
  const snapTable = readCsv(path.join(runDir, "snapshots.csv"), SNAPSHOT_COLUMNS);
  const snapshots = new Map<number, Array<{ alpha: number; re: number; im: number }>>();
  for (const row of snapTable.rows) {
    const t = row.t;
    if (!snapshots.has(t)) snapshots.set(t, []);
    snapshots.get(t)!.push({ alpha: row.alpha, re: row.Re_Z, im: row.Im_Z });
  }
  let summary: RunData["summary"] = null;
  const summaryPath = path.join(runDir, "summary.json");
  if (fs.existsSync(summaryPath)) {
    try {
      summary = JSON.parse(fs.readFileSync(summaryPath, "utf8"));
    } catch (err) {
      throw new SchemaError(summaryPath, `invalid JSON: ${(err as Error).message}`);
    }
  }
  return { energy, snapshots, summary };
}
