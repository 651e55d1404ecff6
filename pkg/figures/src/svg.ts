/**
 * Deterministic SVG emission: every byte of the output is a pure function of
 * the input data, so regenerated figures hash-match their references.
 */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate: ${x}`);
  if (x === 0) return "0";
  const s = x.toPrecision(6);
  // strip trailing zeros / dangling dot without locale surprises
  return s.includes("e") ? s : s.replace(/\.?0+$/, "");
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
];

export class SvgCanvas {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, strokeWidth = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
      `stroke="${stroke}" stroke-width="${fmt(strokeWidth)}"/>`);
  }

  polyline(points: Array<[number, number]>, stroke: string, strokeWidth = 1.2): void {
    const coords = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${coords}" fill="none" stroke="${stroke}" stroke-width="${fmt(strokeWidth)}"/>`);
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, stroke: string, fill = "none"): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
      `stroke="${stroke}" fill="${fill}"/>`);
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string; fill?: string } = {}): void {
    const size = opts.size ?? 11;
    const anchor = opts.anchor ?? "start";
    const fill = opts.fill ?? "#222222";
    const escaped = content.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,Arial,sans-serif" ` +
      `font-size="${size}" text-anchor="${anchor}" fill="${fill}">${escaped}</text>`);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

export interface Scale {
  (v: number): number;
  ticks: number[];
  label(v: number): string;
}

function niceStep(span: number, target: number): number {
  const raw = span / Math.max(target, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi <= lo) {
    const pad = Math.abs(lo) * 0.5 + 1;
    hi = lo + pad;
    lo = lo - pad;
  }
  const step = niceStep(hi - lo, 5);
  const t0 = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = t0; v <= hi + 1e-12 * Math.abs(step); v += step) ticks.push(v);
  const scale = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  scale.ticks = ticks;
  scale.label = (v: number) => fmt(Math.abs(v) < 1e-12 * Math.abs(step) ? 0 : v);
  return scale;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (lo <= 0 || hi <= 0) throw new Error("log scale needs positive bounds");
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi) <= llo ? llo + 1 : Math.log10(hi);
  const ticks: number[] = [];
  for (let e = Math.ceil(llo); e <= Math.floor(lhi); e += 1) ticks.push(Math.pow(10, e));
  if (ticks.length === 0) ticks.push(Math.pow(10, Math.round((llo + lhi) / 2)));
  const scale = ((v: number) => outLo + ((Math.log10(v) - llo) / (lhi - llo)) * (outHi - outLo)) as Scale;
  scale.ticks = ticks;
  scale.label = (v: number) => {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  };
  return scale;
}

export interface PanelFrame {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Draw axes box, ticks and labels; returns pixel mappers for data points. */
export function drawAxes(
  canvas: SvgCanvas,
  frame: PanelFrame,
  xScale: Scale,
  yScale: Scale,
  title: string,
  xLabel: string,
  yLabel: string,
): { px: (v: number) => number; py: (v: number) => number } {
  const { x, y, w, h } = frame;
  canvas.rect(x, y, w, h, "#444444");
  canvas.text(x + w / 2, y - 6, title, { anchor: "middle", size: 12 });
  for (const t of xScale.ticks) {
    const tx = xScale(t);
    canvas.line(tx, y + h, tx, y + h + 4, "#444444");
    canvas.text(tx, y + h + 15, xScale.label(t), { anchor: "middle", size: 9 });
  }
  for (const t of yScale.ticks) {
    const ty = yScale(t);
    canvas.line(x - 4, ty, x, ty, "#444444");
    canvas.text(x - 6, ty + 3, yScale.label(t), { anchor: "end", size: 9 });
  }
  canvas.text(x + w / 2, y + h + 28, xLabel, { anchor: "middle", size: 10 });
  canvas.text(x - 2, y - 6, yLabel, { anchor: "end", size: 10 });
  return { px: (v) => xScale(v), py: (v) => yScale(v) };
}
