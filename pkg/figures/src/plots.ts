/**
 * Figure builders.  Each returns the complete SVG text; writing to disk is
 * the caller's job (so a failure can never leave a partial image behind).
 */

import path from "node:path";
import { MOLLIFY_COLUMNS, RunData, Table, readCsv, readRunDir } from "./csv.js";
import { PALETTE, PanelFrame, SvgCanvas, drawAxes, fmt, linearScale, logScale } from "./svg.js";

const WIDTH = 1180;
const HEIGHT = 640;

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

function seriesPanel(
  canvas: SvgCanvas,
  frame: PanelFrame,
  t: number[],
  series: Array<{ name: string; values: number[] }>,
  title: string,
  logY = false,
): void {
  const [tLo, tHi] = extent(t);
  let values = series.flatMap((s) => s.values).filter((v) => Number.isFinite(v));
  if (logY) values = values.filter((v) => v > 0);
  let [vLo, vHi] = extent(values);
  const xScale = linearScale(tLo, tHi, frame.x, frame.x + frame.w);
  let yScale;
  if (logY && vLo > 0) {
    yScale = logScale(vLo, vHi, frame.y + frame.h, frame.y);
  } else {
    const pad = 0.05 * (vHi - vLo || Math.abs(vLo) || 1);
    yScale = linearScale(vLo - pad, vHi + pad, frame.y + frame.h, frame.y);
  }
  drawAxes(canvas, frame, xScale, yScale, title, "t", "");
  series.forEach((s, i) => {
    const pts: Array<[number, number]> = [];
    for (let j = 0; j < t.length; j += 1) {
      const v = s.values[j];
      if (Number.isFinite(v) && (!logY || v > 0)) pts.push([xScale(t[j]), yScale(v)]);
    }
    if (pts.length > 0) canvas.polyline(pts, PALETTE[i % PALETTE.length]);
    canvas.text(frame.x + frame.w - 4, frame.y + 14 + 12 * i, s.name,
      { anchor: "end", size: 10, fill: PALETTE[i % PALETTE.length] });
  });
}

export function plotRun(runDir: string): string {
  const data: RunData = readRunDir(runDir);
  const canvas = new SvgCanvas(WIDTH, HEIGHT);
  const energy = data.energy;
  const t = energy.rows.map((r) => r.t);

  canvas.text(16, 22, `run: ${path.basename(path.resolve(runDir))}`, { size: 13 });
  if (data.summary?.reason) {
    canvas.text(WIDTH - 16, 22, `termination: ${data.summary.reason}`, { size: 12, anchor: "end" });
  }

  // left panel: interface snapshots colored by report time
  const left: PanelFrame = { x: 60, y: 60, w: 500, h: 520 };
  const times = [...data.snapshots.keys()].sort((a, b) => a - b);
  const allRe: number[] = [];
  const allIm: number[] = [];
  for (const pts of data.snapshots.values()) {
    for (const p of pts) {
      allRe.push(p.re);
      allIm.push(p.im);
    }
  }
  const [reLo, reHi] = extent(allRe);
  const imExt = extent(allIm);
  const imPad = Math.max(0.1, 0.15 * (imExt[1] - imExt[0]));
  const xS = linearScale(reLo, reHi, left.x, left.x + left.w);
  const yS = linearScale(imExt[0] - imPad, imExt[1] + imPad, left.y + left.h, left.y);
  drawAxes(canvas, left, xS, yS, "interface snapshots", "Re Z", "Im Z");
  times.forEach((time, i) => {
    const pts = data.snapshots.get(time)!;
    const coords: Array<[number, number]> = pts.map((p) => [xS(p.re), yS(p.im)]);
    canvas.polyline(coords, PALETTE[i % PALETTE.length], 1.0);
  });
  times.forEach((time, i) => {
    canvas.text(left.x + 8, left.y + 16 + 11 * i, `t=${fmt(time)}`,
      { size: 9, fill: PALETTE[i % PALETTE.length] });
  });

  // right 2x2 grid: energy traces and monitors
  const grid: PanelFrame[] = [
    { x: 640, y: 60, w: 230, h: 220 },
    { x: 930, y: 60, w: 230, h: 220 },
    { x: 640, y: 360, w: 230, h: 220 },
    { x: 930, y: 360, w: 230, h: 220 },
  ];
  const col = (name: string) => energy.rows.map((r) => r[name]);
  seriesPanel(canvas, grid[0], t, [
    { name: "frakE", values: col("frakE") },
    { name: "calE", values: col("calE") },
  ], "blow-up energies");
  seriesPanel(canvas, grid[1], t, [
    { name: "E2", values: col("E2") },
    { name: "E3", values: col("E3") },
  ], "higher-order energies", true);
  seriesPanel(canvas, grid[2], t, [
    { name: "taylor_min", values: col("taylor_min") },
    { name: "chord_arc", values: col("chord_arc_delta") },
  ], "geometry monitors");
  seriesPanel(canvas, grid[3], t, [
    { name: "holo_Zt", values: col("holo_Zt").map((v) => Math.max(v, 1e-17)) },
    { name: "holo_Za", values: col("holo_Za").map((v) => Math.max(v, 1e-17)) },
  ], "constraint residuals", true);

  return canvas.render();
}

export function fitSlope(xs: number[], ys: number[]): number {
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i += 1) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

export function plotMollifyStudy(csvPath: string): string {
  const table: Table = readCsv(csvPath, MOLLIFY_COLUMNS);
  const canvas = new SvgCanvas(640, 480);
  const frame: PanelFrame = { x: 80, y: 60, w: 480, h: 340 };
  return renderMollify(canvas, frame, table, csvPath);
}

function renderMollify(canvas: SvgCanvas, frame: PanelFrame, table: Table, csvPath: string): string {
  canvas.text(16, 22, "mollification study", { size: 13 });
  const rows = table.rows.filter((r) => Number.isFinite(r.eps) && Number.isFinite(r.d_eps) && r.d_eps > 0);
  if (rows.length === 0) {
    const xS = logScale(1e-2, 1e-1, frame.x, frame.x + frame.w);
    const yS = logScale(1e-8, 1, frame.y + frame.h, frame.y);
    drawAxes(canvas, frame, xS, yS, "successive differences", "eps", "d_eps");
    canvas.text(frame.x + frame.w / 2, frame.y + frame.h / 2,
      "warning: empty study table", { anchor: "middle", size: 14, fill: "#aa3311" });
    return canvas.render();
  }
  rows.sort((a, b) => a.eps - b.eps);
  const eps = rows.map((r) => r.eps);
  const d = rows.map((r) => r.d_eps);
  const xS = logScale(Math.min(...eps) / 1.5, Math.max(...eps) * 1.5, frame.x, frame.x + frame.w);
  const yS = logScale(Math.min(...d) / 1.5, Math.max(...d) * 1.5, frame.y + frame.h, frame.y);
  drawAxes(canvas, frame, xS, yS, "successive differences", "eps", "d_eps");
  const pts: Array<[number, number]> = rows.map((r) => [xS(r.eps), yS(r.d_eps)]);
  for (const [cx, cy] of pts) canvas.circle(cx, cy, 3.4, PALETTE[0]);
  if (rows.length >= 2) {
    canvas.polyline(pts, PALETTE[0]);
    const slope = fitSlope(eps.map(Math.log10), d.map(Math.log10));
    canvas.text(frame.x + 12, frame.y + 20, `fitted slope: ${fmt(slope)}`, { size: 12 });
  }
  return canvas.render();
}
