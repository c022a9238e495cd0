/**
 * Reader for the sweep-runner output pair: a CSV whose header block is `#`
 * comment lines followed by one column-name row, plus a `.meta.json` echo of
 * parameters and reference loci.
 */

import { readFileSync } from "node:fs";

export class MissingColumnError extends Error {
  constructor(public readonly column: string, available: string[]) {
    super(`column '${column}' not found; csv has: ${available.join(", ")}`);
    this.name = "MissingColumnError";
  }
}

export interface Table {
  columns: string[];
  rows: number[][];
  comments: string[];
}

export interface ReferenceLoci {
  vlines?: number[];
  hlines?: number[];
  diagonal?: boolean;
  points?: [number, number][];
}

export interface Meta {
  tool?: string;
  version?: string;
  scenario?: string;
  parameters?: Record<string, unknown>;
  columns?: string[];
  reference_loci?: ReferenceLoci;
}

export function parseCsv(text: string): Table {
  const comments: string[] = [];
  let header: string[] | null = null;
  const rows: number[][] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      comments.push(line);
      continue;
    }
    if (header === null) {
      header = line.split(",").map((s) => s.trim());
      continue;
    }
    const row = line.split(",").map((s) => {
      const v = Number(s);
      if (Number.isNaN(v) && s.trim() !== "nan") {
        throw new Error(`unparseable numeric field '${s}'`);
      }
      return v;
    });
    if (row.length !== header.length) {
      throw new Error(
        `row has ${row.length} fields, header has ${header.length}`,
      );
    }
    rows.push(row);
  }
  if (header === null) {
    throw new Error("csv has no header row");
  }
  return { columns: header, rows, comments };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function readMeta(path: string): Meta {
  return JSON.parse(readFileSync(path, "utf-8")) as Meta;
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new MissingColumnError(name, table.columns);
  return idx;
}

export function column(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((r) => r[idx]);
}

/** Distinct values of a column in ascending order. */
export function axisValues(table: Table, name: string): number[] {
  const vals = Array.from(new Set(column(table, name)));
  vals.sort((a, b) => a - b);
  return vals;
}

export interface Grid {
  x: number[];
  y: number[];
  /** values[j][i] is the cell at (x[i], y[j]); NaN marks absent points */
  values: number[][];
}

/** Reshape long-format rows into a dense grid over two axis columns. */
export function toGrid(table: Table, xName: string, yName: string, vName: string): Grid {
  const xi = columnIndex(table, xName);
  const yi = columnIndex(table, yName);
  const vi = columnIndex(table, vName);
  const x = axisValues(table, xName);
  const y = axisValues(table, yName);
  const xPos = new Map(x.map((v, i) => [v, i]));
  const yPos = new Map(y.map((v, i) => [v, i]));
  const values = y.map(() => x.map(() => Number.NaN));
  for (const row of table.rows) {
    const i = xPos.get(row[xi]);
    const j = yPos.get(row[yi]);
    if (i === undefined || j === undefined) continue;
    values[j][i] = row[vi];
  }
  if (values.length === 0 || x.length === 0) {
    throw new Error("grid reshape produced an empty grid");
  }
  return { x, y, values };
}
