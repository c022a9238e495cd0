/**
 * Minimal deterministic SVG assembly: fixed canvas, linear/log scales, tick
 * generation via d3-array, everything serialized with stable number
 * formatting so re-renders are byte-identical.
 */

import { ticks } from "d3-array";

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { top: 42, right: 110, bottom: 56, left: 72 };

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toPrecision(8);
  // normalize -0 and trailing zeros for stable output
  const n = Number(s);
  return Object.is(n, -0) ? "0" : String(n);
}

export interface Scale {
  (v: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.ticks = () => ticks(d0, d1, 6);
  f.domain = domain;
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error("log scale needs positive bounds");
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const span = l1 - l0 === 0 ? 1 : l1 - l0;
  const [r0, r1] = range;
  const f = ((v: number) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0)) as Scale;
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0 - 1e-9); e <= Math.floor(l1 + 1e-9); e++) {
      out.push(10 ** e);
    }
    return out.length >= 2 ? out : ticks(d0, d1, 4);
  };
  f.domain = domain;
  return f;
}

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e4)) {
    return v.toExponential(0).replace("+", "");
  }
  return fmt(Number(v.toPrecision(6)));
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(width = WIDTH, height = HEIGHT) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, extra = ""): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}"${extra}/>`,
    );
  }

  text(x: number, y: number, content: string, extra = ""): void {
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}"${extra}>${esc(content)}</text>`);
  }

  path(d: string, extra: string): void {
    this.parts.push(`<path d="${d}"${extra}/>`);
  }

  finish(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export interface Frame {
  xScale: Scale;
  yScale: Scale;
  plotX: [number, number];
  plotY: [number, number];
}

export function makeFrame(
  xDomain: [number, number],
  yDomain: [number, number],
  logX = false,
  logY = false,
): Frame {
  const plotX: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const plotY: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const xScale = (logX ? logScale : linearScale)(xDomain, plotX);
  const yScale = (logY ? logScale : linearScale)(yDomain, plotY);
  return { xScale, yScale, plotX, plotY };
}

export function drawAxes(
  doc: SvgDoc,
  frame: Frame,
  xLabel: string,
  yLabel: string,
  title: string,
): void {
  const { xScale, yScale, plotX, plotY } = frame;
  const axisStyle = ' stroke-width="1"';
  doc.line(plotX[0], plotY[0], plotX[1], plotY[0], "black", axisStyle);
  doc.line(plotX[0], plotY[0], plotX[0], plotY[1], "black", axisStyle);
  for (const t of xScale.ticks()) {
    const px = xScale(t);
    if (px < plotX[0] - 1e-6 || px > plotX[1] + 1e-6) continue;
    doc.line(px, plotY[0], px, plotY[0] + 5, "black", axisStyle);
    doc.text(px, plotY[0] + 20, tickLabel(t), ' text-anchor="middle" font-size="12"');
  }
  for (const t of yScale.ticks()) {
    const py = yScale(t);
    if (py > plotY[0] + 1e-6 || py < plotY[1] - 1e-6) continue;
    doc.line(plotX[0] - 5, py, plotX[0], py, "black", axisStyle);
    doc.text(plotX[0] - 8, py + 4, tickLabel(t), ' text-anchor="end" font-size="12"');
  }
  const midX = (plotX[0] + plotX[1]) / 2;
  doc.text(midX, HEIGHT - 14, xLabel, ' text-anchor="middle" font-size="14"');
  doc.add(
    `<text x="20" y="${fmt((plotY[0] + plotY[1]) / 2)}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 20 ${fmt((plotY[0] + plotY[1]) / 2)})">${esc(yLabel)}</text>`,
  );
  doc.text(midX, 24, title, ' text-anchor="middle" font-size="15" font-weight="bold"');
}

/** Vertical color legend on the right edge. */
export function drawColorbar(
  doc: SvgDoc,
  lo: number,
  hi: number,
  color: (t: number) => string,
  label: string,
): void {
  const x = WIDTH - MARGIN.right + 28;
  const y0 = MARGIN.top;
  const y1 = HEIGHT - MARGIN.bottom;
  const n = 64;
  const h = (y1 - y0) / n;
  for (let k = 0; k < n; k++) {
    // top of the bar is the maximum
    const t = 1 - k / (n - 1);
    doc.rect(x, y0 + k * h, 16, h + 0.5, color(t));
  }
  doc.add(
    `<rect x="${fmt(x)}" y="${fmt(y0)}" width="16" height="${fmt(y1 - y0)}" fill="none" stroke="black"/>`,
  );
  doc.text(x + 22, y0 + 10, tickLabel(hi), ' font-size="11"');
  doc.text(x + 22, y1, tickLabel(lo), ' font-size="11"');
  doc.text(x + 8, y0 - 8, label, ' text-anchor="middle" font-size="12"');
}

export function drawReferenceLoci(
  doc: SvgDoc,
  frame: Frame,
  loci: {
    vlines?: number[];
    hlines?: number[];
    diagonal?: boolean;
    points?: [number, number][];
  },
): void {
  const dash = ' stroke-width="1.5" stroke-dasharray="6,4"';
  const { xScale, yScale, plotX, plotY } = frame;
  for (const v of loci.vlines ?? []) {
    const px = xScale(v);
    if (px >= plotX[0] && px <= plotX[1]) {
      doc.line(px, plotY[0], px, plotY[1], "white", dash);
    }
  }
  for (const h of loci.hlines ?? []) {
    const py = yScale(h);
    if (py <= plotY[0] && py >= plotY[1]) {
      doc.line(plotX[0], py, plotX[1], py, "white", dash);
    }
  }
  if (loci.diagonal) {
    const lo = Math.max(xScale.domain[0], yScale.domain[0]);
    const hi = Math.min(xScale.domain[1], yScale.domain[1]);
    if (hi > lo) {
      doc.line(xScale(lo), yScale(lo), xScale(hi), yScale(hi), "white", dash);
    }
  }
  for (const [px, py] of loci.points ?? []) {
    const cx = xScale(px);
    const cy = yScale(py);
    if (cx >= plotX[0] && cx <= plotX[1] && cy <= plotY[0] && cy >= plotY[1]) {
      doc.add(
        `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="4" fill="none" stroke="white" stroke-width="1.5"/>`,
      );
    }
  }
}
