/** Figure scene model plus axis scaling: a figure is built once as plain
 * shapes, then rendered to SVG text or rasterized to PNG from the same data,
 * which keeps both outputs deterministic. */

export interface Polyline {
  kind: "polyline";
  points: Array<[number, number]>;
  color: string;
  width: number;
}

export interface TextLabel {
  kind: "text";
  x: number;
  y: number;
  text: string;
  size: number;
  color: string;
  anchor: "start" | "middle" | "end";
}

export interface Rect {
  kind: "rect";
  x: number;
  y: number;
  w: number;
  h: number;
  fill: string;
}

export type Shape = Polyline | TextLabel | Rect;

export interface Scene {
  width: number;
  height: number;
  shapes: Shape[];
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export interface Scale {
  (value: number): number;
  ticks: number[];
}

/** Nice round tick positions covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) hi = lo + 1;
  const span = hi - lo;
  const step0 = span / Math.max(1, count - 1);
  const magnitude = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = magnitude;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * magnitude >= step0) {
      step = m * magnitude;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function linearScale(lo: number, hi: number, rangeLo: number, rangeHi: number): Scale {
  if (!(hi > lo)) hi = lo + 1;
  const scale = ((value: number) =>
    rangeLo + ((value - lo) / (hi - lo)) * (rangeHi - rangeLo)) as Scale;
  scale.ticks = niceTicks(lo, hi);
  return scale;
}

export function log10Scale(lo: number, hi: number, rangeLo: number, rangeHi: number): Scale {
  const safeLo = Math.max(lo, 1e-300);
  const a = Math.log10(safeLo);
  let b = Math.log10(Math.max(hi, safeLo));
  if (!(b > a)) b = a + 1;
  const scale = ((value: number) =>
    rangeLo + ((Math.log10(Math.max(value, 1e-300)) - a) / (b - a)) * (rangeHi - rangeLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(a); e <= Math.ceil(b); e++) ticks.push(Math.pow(10, e));
  scale.ticks = ticks.filter((t) => t >= safeLo / 1.0001 && t <= hi * 1.0001);
  if (scale.ticks.length === 0) scale.ticks = [safeLo];
  return scale;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) {
    const exponent = Math.floor(Math.log10(abs));
    const mantissa = value / Math.pow(10, exponent);
    const m = Math.round(mantissa * 100) / 100;
    return `${m}e${exponent}`;
  }
  return String(Math.round(value * 1e6) / 1e6);
}

export interface SeriesSpec {
  label: string;
  x: number[];
  y: number[];
  /** draw as a right-continuous staircase (for empirical CDFs) */
  step?: boolean;
}

export interface FrameSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: SeriesSpec[];
  logY?: boolean;
  yMax?: number;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 70, right: 20, top: 36, bottom: 48 };

/** Lay out axes, gridlines, series and legend into a scene. */
export function buildScene(spec: FrameSpec): Scene {
  const shapes: Shape[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const positives = ys.filter((v) => v > 0);
  const yLo = spec.logY ? Math.min(...(positives.length ? positives : [1e-12])) : Math.min(0, ...ys);
  const yHi = spec.yMax ?? Math.max(...ys);

  const sx = linearScale(xLo, xHi, x0, x1);
  const sy = spec.logY ? log10Scale(yLo, yHi, y0, y1) : linearScale(yLo, yHi, y0, y1);

  shapes.push({ kind: "rect", x: 0, y: 0, w: WIDTH, h: HEIGHT, fill: "#ffffff" });

  for (const t of sy.ticks) {
    const y = sy(t);
    shapes.push({ kind: "polyline", points: [[x0, y], [x1, y]], color: "#dddddd", width: 1 });
    shapes.push({ kind: "text", x: x0 - 6, y: y + 3, text: formatTick(t), size: 10, color: "#333333", anchor: "end" });
  }
  for (const t of sx.ticks) {
    const x = sx(t);
    shapes.push({ kind: "polyline", points: [[x, y0], [x, y0 + 4]], color: "#333333", width: 1 });
    shapes.push({ kind: "text", x, y: y0 + 16, text: formatTick(t), size: 10, color: "#333333", anchor: "middle" });
  }
  // axes frame
  shapes.push({ kind: "polyline", points: [[x0, y1], [x0, y0], [x1, y0]], color: "#333333", width: 1.5 });

  spec.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    const points: Array<[number, number]> = [];
    for (let i = 0; i < series.x.length; i++) {
      const px = sx(series.x[i]);
      const py = sy(series.y[i]);
      if (series.step && points.length > 0) {
        points.push([px, points[points.length - 1][1]]);
      }
      points.push([px, py]);
    }
    shapes.push({ kind: "polyline", points, color, width: 1.8 });
    const ly = y1 + 6 + index * 14;
    shapes.push({ kind: "polyline", points: [[x1 - 110, ly], [x1 - 90, ly]], color, width: 2.5 });
    shapes.push({ kind: "text", x: x1 - 84, y: ly + 3.5, text: series.label, size: 11, color: "#111111", anchor: "start" });
  });

  shapes.push({ kind: "text", x: WIDTH / 2, y: 18, text: spec.title, size: 13, color: "#111111", anchor: "middle" });
  shapes.push({ kind: "text", x: (x0 + x1) / 2, y: HEIGHT - 12, text: spec.xLabel, size: 11, color: "#111111", anchor: "middle" });
  shapes.push({ kind: "text", x: 14, y: (y0 + y1) / 2, text: spec.yLabel, size: 11, color: "#111111", anchor: "middle" });

  return { width: WIDTH, height: HEIGHT, shapes };
}
