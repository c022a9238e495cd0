/**
 * Figure kinds over sweep tables: filled contours, density maps, diverging
 * sign maps, and multi-series scaling lines. Rendering is a pure function of
 * the CSV bytes and the figure spec; no physics is recomputed here.
 */

import { contours } from "d3-contour";
import { range, ticks } from "d3-array";
import {
  interpolateRdBu,
  interpolateViridis,
  schemeTableau10,
} from "d3-scale-chromatic";

import {
  Grid,
  Meta,
  Table,
  axisValues,
  column,
  columnIndex,
  toGrid,
} from "./csv.js";
import {
  Frame,
  SvgDoc,
  drawAxes,
  drawColorbar,
  drawReferenceLoci,
  fmt,
  makeFrame,
  tickLabel,
  MARGIN,
  WIDTH,
  HEIGHT,
} from "./svg.js";

export type FigureKind = "contour2d" | "density2d" | "lines_vs_g" | "sign_map";

export interface FigureSpec {
  input_csv: string;
  meta?: string;
  kind: FigureKind;
  x: string;
  y?: string;
  value: string;
  series?: string;
  levels?: number;
  log_x?: boolean;
  log_y?: boolean;
  clip_min?: number;
  x_label?: string;
  y_label?: string;
  title?: string;
  output: string;
}

function finiteValues(grid: Grid): number[] {
  const out: number[] = [];
  for (const row of grid.values) {
    for (const v of row) if (Number.isFinite(v)) out.push(v);
  }
  if (out.length === 0) throw new Error("grid holds no finite values");
  return out;
}

function gridFrame(spec: FigureSpec, grid: Grid): Frame {
  return makeFrame(
    [grid.x[0], grid.x[grid.x.length - 1]],
    [grid.y[0], grid.y[grid.y.length - 1]],
    spec.log_x ?? false,
    spec.log_y ?? false,
  );
}

/** Cell boundaries at midpoints between consecutive axis values. */
function cellEdges(axis: number[]): number[] {
  const edges = [axis[0] - (axis[1] - axis[0]) / 2];
  for (let i = 0; i + 1 < axis.length; i++) edges.push((axis[i] + axis[i + 1]) / 2);
  edges.push(axis[axis.length - 1] + (axis[axis.length - 1] - axis[axis.length - 2]) / 2);
  return edges;
}

function paintCells(
  doc: SvgDoc,
  frame: Frame,
  grid: Grid,
  colorOf: (v: number) => string,
): void {
  const ex = cellEdges(grid.x);
  const ey = cellEdges(grid.y);
  for (let j = 0; j < grid.y.length; j++) {
    for (let i = 0; i < grid.x.length; i++) {
      const v = grid.values[j][i];
      if (!Number.isFinite(v)) continue;
      const x0 = frame.xScale(ex[i]);
      const x1 = frame.xScale(ex[i + 1]);
      const y0 = frame.yScale(ey[j]);
      const y1 = frame.yScale(ey[j + 1]);
      doc.rect(
        Math.min(x0, x1),
        Math.min(y0, y1),
        Math.abs(x1 - x0) + 0.4,
        Math.abs(y1 - y0) + 0.4,
        colorOf(v),
      );
    }
  }
}

function renderDensity(spec: FigureSpec, table: Table, meta: Meta, doc: SvgDoc): void {
  const grid = toGrid(table, spec.x, spec.y ?? "", spec.value);
  const vals = finiteValues(grid);
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const span = hi - lo === 0 ? 1 : hi - lo;
  const clip = spec.clip_min;
  const frame = gridFrame(spec, grid);
  const colorOf = (v: number) => {
    if (clip !== undefined && v < clip) return "white";
    return interpolateViridis((v - lo) / span);
  };
  paintCells(doc, frame, grid, colorOf);
  drawReferenceLoci(doc, frame, meta.reference_loci ?? {});
  drawAxes(doc, frame, spec.x_label ?? spec.x, spec.y_label ?? spec.y ?? "", spec.title ?? "");
  drawColorbar(doc, lo, hi, (t) => interpolateViridis(t), spec.value);
}

function renderSignMap(spec: FigureSpec, table: Table, meta: Meta, doc: SvgDoc): void {
  const grid = toGrid(table, spec.x, spec.y ?? "", spec.value);
  const vals = finiteValues(grid);
  const amp = Math.max(...vals.map(Math.abs)) || 1;
  const frame = gridFrame(spec, grid);
  // diverging map centered at zero: negative red, positive blue
  const colorOf = (v: number) => interpolateRdBu(0.5 + v / (2 * amp));
  paintCells(doc, frame, grid, colorOf);
  drawReferenceLoci(doc, frame, { ...(meta.reference_loci ?? {}) });
  drawAxes(doc, frame, spec.x_label ?? spec.x, spec.y_label ?? spec.y ?? "", spec.title ?? "");
  drawColorbar(doc, -amp, amp, (t) => interpolateRdBu(t), spec.value);
}

function renderContour(spec: FigureSpec, table: Table, meta: Meta, doc: SvgDoc): void {
  const grid = toGrid(table, spec.x, spec.y ?? "", spec.value);
  const vals = finiteValues(grid);
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const span = hi - lo === 0 ? 1 : hi - lo;
  const nLevels = spec.levels ?? 10;
  const thresholds = ticks(lo, hi, nLevels);
  const frame = gridFrame(spec, grid);
  const nx = grid.x.length;
  const ny = grid.y.length;
  const flat = new Array<number>(nx * ny);
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) flat[j * nx + i] = grid.values[j][i];
  }
  // contour coordinates live on the uniform index grid; map them affinely
  const dx = nx > 1 ? (grid.x[nx - 1] - grid.x[0]) / (nx - 1) : 1;
  const dy = ny > 1 ? (grid.y[ny - 1] - grid.y[0]) / (ny - 1) : 1;
  const toDataX = (gx: number) => grid.x[0] + (gx - 0.5) * dx;
  const toDataY = (gy: number) => grid.y[0] + (gy - 0.5) * dy;

  // background at the lowest band color
  doc.rect(
    Math.min(frame.xScale(grid.x[0]), frame.xScale(grid.x[nx - 1])),
    Math.min(frame.yScale(grid.y[0]), frame.yScale(grid.y[ny - 1])),
    Math.abs(frame.xScale(grid.x[nx - 1]) - frame.xScale(grid.x[0])),
    Math.abs(frame.yScale(grid.y[ny - 1]) - frame.yScale(grid.y[0])),
    interpolateViridis(0),
  );
  const generator = contours().size([nx, ny]).thresholds(thresholds);
  const polys = generator(flat);
  for (const c of polys) {
    const t = (c.value - lo) / span;
    const fill = interpolateViridis(Math.max(0, Math.min(1, t)));
    const parts: string[] = [];
    for (const polygon of c.coordinates) {
      for (const ring of polygon) {
        const pts = ring.map(
          ([gx, gy]) =>
            `${fmt(frame.xScale(toDataX(gx)))},${fmt(frame.yScale(toDataY(gy)))}`,
        );
        parts.push(`M${pts.join("L")}Z`);
      }
    }
    if (parts.length > 0) {
      doc.path(
        parts.join(""),
        ` fill="${fill}" stroke="rgba(0,0,0,0.25)" stroke-width="0.5" fill-rule="evenodd"`,
      );
    }
  }
  drawReferenceLoci(doc, frame, meta.reference_loci ?? {});
  drawAxes(doc, frame, spec.x_label ?? spec.x, spec.y_label ?? spec.y ?? "", spec.title ?? "");
  drawColorbar(doc, lo, hi, (t) => interpolateViridis(t), spec.value);
}

function renderLines(spec: FigureSpec, table: Table, meta: Meta, doc: SvgDoc): void {
  const xs = column(table, spec.x);
  const vs = column(table, spec.value);
  if (xs.length === 0) throw new Error("csv has no data rows");
  const seriesName = spec.series;
  const seriesIdx = seriesName ? columnIndex(table, seriesName) : -1;
  const seriesValues = seriesName ? axisValues(table, seriesName) : [Number.NaN];

  const xDomain: [number, number] = [Math.min(...xs), Math.max(...xs)];
  const finiteV = vs.filter(Number.isFinite);
  let vLo = Math.min(...finiteV);
  let vHi = Math.max(...finiteV);
  if (vLo === vHi) {
    vLo -= Math.abs(vLo) * 0.1 + 1e-12;
    vHi += Math.abs(vHi) * 0.1 + 1e-12;
  } else {
    const pad = (vHi - vLo) * 0.08;
    vLo -= pad;
    vHi += pad;
  }
  const frame = makeFrame(xDomain, [vLo, vHi], spec.log_x ?? false, spec.log_y ?? false);

  const xi = columnIndex(table, spec.x);
  const vi = columnIndex(table, spec.value);
  seriesValues.forEach((s, k) => {
    const pts = table.rows
      .filter((r) => (seriesIdx < 0 ? true : r[seriesIdx] === s))
      .map((r) => [r[xi], r[vi]] as [number, number])
      .filter(([, v]) => Number.isFinite(v))
      .sort((a, b) => a[0] - b[0]);
    if (pts.length === 0) return;
    const color = schemeTableau10[k % schemeTableau10.length];
    const d = pts
      .map(([x, v], n) => `${n === 0 ? "M" : "L"}${fmt(frame.xScale(x))},${fmt(frame.yScale(v))}`)
      .join("");
    doc.path(d, ` fill="none" stroke="${color}" stroke-width="2"`);
    for (const [x, v] of pts) {
      doc.add(
        `<circle cx="${fmt(frame.xScale(x))}" cy="${fmt(frame.yScale(v))}" r="2.5" fill="${color}"/>`,
      );
    }
    const legendY = MARGIN.top + 16 * k;
    doc.line(WIDTH - MARGIN.right + 14, legendY, WIDTH - MARGIN.right + 34, legendY, color, ' stroke-width="2"');
    if (seriesIdx >= 0) {
      doc.text(
        WIDTH - MARGIN.right + 38,
        legendY + 4,
        `${seriesName}=${tickLabel(s)}`,
        ' font-size="11"',
      );
    }
  });
  drawAxes(doc, frame, spec.x_label ?? spec.x, spec.y_label ?? spec.value, spec.title ?? "");
}

export function render(spec: FigureSpec, table: Table, meta: Meta): string {
  const doc = new SvgDoc();
  switch (spec.kind) {
    case "density2d":
      renderDensity(spec, table, meta, doc);
      break;
    case "sign_map":
      renderSignMap(spec, table, meta, doc);
      break;
    case "contour2d":
      renderContour(spec, table, meta, doc);
      break;
    case "lines_vs_g":
      renderLines(spec, table, meta, doc);
      break;
    default:
      throw new Error(`unknown figure kind '${(spec as FigureSpec).kind}'`);
  }
  return doc.finish();
}
