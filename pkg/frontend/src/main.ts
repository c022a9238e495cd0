/**
 * qrmlab-fig <figure-spec.json> [...more specs]
 *
 * Reads the sweep CSV and meta named by each spec (paths resolved relative to
 * the spec file), renders a static SVG, and writes it to the spec's output
 * path. Exits nonzero on the first failure, naming missing columns.
 */

import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { MissingColumnError, readCsv, readMeta, Meta } from "./csv.js";
import { FigureSpec, render } from "./render.js";

const KINDS = new Set(["contour2d", "density2d", "lines_vs_g", "sign_map"]);

export function loadSpec(path: string): FigureSpec {
  const raw = JSON.parse(readFileSync(path, "utf-8")) as Partial<FigureSpec>;
  if (typeof raw.input_csv !== "string") {
    throw new Error(`${path}: input_csv: expected a path`);
  }
  if (typeof raw.kind !== "string" || !KINDS.has(raw.kind)) {
    throw new Error(`${path}: kind: expected one of ${[...KINDS].join(", ")}`);
  }
  if (typeof raw.output !== "string") {
    throw new Error(`${path}: output: expected a path`);
  }
  if (typeof raw.x !== "string" || typeof raw.value !== "string") {
    throw new Error(`${path}: x and value column names are required`);
  }
  if ((raw.kind === "contour2d" || raw.kind === "density2d" || raw.kind === "sign_map") &&
      typeof raw.y !== "string") {
    throw new Error(`${path}: y: grid figures need a y column`);
  }
  const base = dirname(resolve(path));
  const spec = raw as FigureSpec;
  spec.input_csv = resolve(base, spec.input_csv);
  spec.output = resolve(base, spec.output);
  if (spec.meta !== undefined) {
    spec.meta = resolve(base, spec.meta);
  } else {
    const guess = spec.input_csv.replace(/\.csv$/, ".meta.json");
    spec.meta = existsSync(guess) ? guess : undefined;
  }
  return spec;
}

export function renderSpecFile(path: string): string {
  const spec = loadSpec(path);
  const table = readCsv(spec.input_csv);
  const meta: Meta = spec.meta ? readMeta(spec.meta) : {};
  const svg = render(spec, table, meta);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg);
  return spec.output;
}

export function main(argv: string[]): number {
  if (argv.length === 0) {
    console.error("usage: qrmlab-fig <figure-spec.json> [...more specs]");
    return 2;
  }
  for (const path of argv) {
    try {
      const out = renderSpecFile(path);
      console.log(`wrote ${out}`);
    } catch (err) {
      if (err instanceof MissingColumnError) {
        console.error(`error: ${path}: ${err.message}`);
      } else {
        console.error(`error: ${path}: ${(err as Error).message}`);
      }
      return 1;
    }
  }
  return 0;
}
