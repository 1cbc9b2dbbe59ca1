// Hand-built deterministic SVG: no DOM, no timestamps, stable float
// formatting, so identical inputs produce byte-identical files.

export interface Extent {
  min: number;
  max: number;
}

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return '0';
  const s = v.toPrecision(8);
  return String(Number(s));
}

export function extentOf(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === Infinity) throw new Error('no finite values to scale');
  if (min === max) {
    min -= 1;
    max += 1;
  }
  return { min, max };
}

// round tick step to 1/2/5 times a power of ten
export function niceTicks(ext: Extent, target = 6): number[] {
  const span = ext.max - ext.min;
  const raw = span / Math.max(1, target);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  const first = Math.ceil(ext.min / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= ext.max + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

export function logTicks(ext: Extent): number[] {
  const lo = Math.floor(Math.log10(ext.min));
  const hi = Math.ceil(Math.log10(ext.max));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) ticks.push(Math.pow(10, e));
  return ticks.filter((t) => t >= ext.min / 1.0001 && t <= ext.max * 1.0001);
}

export class LinearScale {
  constructor(readonly domain: Extent, readonly range: [number, number]) {}
  map(v: number): number {
    const t = (v - this.domain.min) / (this.domain.max - this.domain.min);
    return this.range[0] + t * (this.range[1] - this.range[0]);
  }
}

export class LogScale {
  constructor(readonly domain: Extent, readonly range: [number, number]) {}
  map(v: number): number {
    const t =
      (Math.log10(v) - Math.log10(this.domain.min)) /
      (Math.log10(this.domain.max) - Math.log10(this.domain.min));
    return this.range[0] + t * (this.range[1] - this.range[0]);
  }
}

export const PALETTE = [
  '#0173b2',
  '#de8f05',
  '#029e73',
  '#d55e00',
  '#cc78bc',
  '#ca9161',
  '#56b4e9',
  '#949494',
  '#ece133',
];

// compact viridis-like ramp; linear interpolation between stops
const RAMP: Array<[number, [number, number, number]]> = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

export function colormap(t: number): string {
  if (!Number.isFinite(t)) return '#d8d8d8';
  const x = Math.min(1, Math.max(0, t));
  for (let i = 1; i < RAMP.length; i++) {
    if (x <= RAMP[i][0]) {
      const [t0, c0] = RAMP[i - 1];
      const [t1, c1] = RAMP[i];
      const u = (x - t0) / (t1 - t0);
      const c = c0.map((a, k) => Math.round(a + u * (c1[k] - a)));
      return `rgb(${c[0]},${c[1]},${c[2]})`;
    }
  }
  return 'rgb(253,231,37)';
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_FRAME: Frame = {
  width: 640,
  height: 440,
  left: 70,
  right: 160,
  top: 40,
  bottom: 55,
};

export function svgDocument(frame: Frame, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>`,
    ...body,
    '</svg>',
    '',
  ].join('\n');
}

export function axes(
  frame: Frame,
  xs: LinearScale,
  ysMap: (v: number) => number,
  xTicks: number[],
  yTicks: number[],
  xLabel: string,
  yLabel: string,
  title: string,
): string[] {
  const x0 = frame.left;
  const x1 = frame.width - frame.right;
  const y0 = frame.height - frame.bottom;
  const y1 = frame.top;
  const parts: string[] = [];
  parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#222" stroke-width="1"/>`);
  for (const t of xTicks) {
    const px = xs.map(t);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#222"/>`);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y1}" stroke="#eee"/>`);
    parts.push(`<text x="${fmt(px)}" y="${y0 + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of yTicks) {
    const py = ysMap(t);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#222"/>`);
    parts.push(`<line x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="#eee"/>`);
    parts.push(`<text x="${x0 - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${fmt(t)}</text>`);
  }
  if (xLabel) parts.push(`<text x="${fmt((x0 + x1) / 2)}" y="${frame.height - 12}" text-anchor="middle" font-size="13">${xLabel}</text>`);
  if (yLabel) parts.push(`<text x="18" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${fmt((y0 + y1) / 2)})">${yLabel}</text>`);
  if (title) parts.push(`<text x="${fmt((x0 + x1) / 2)}" y="24" text-anchor="middle" font-size="14" font-weight="bold">${title}</text>`);
  return parts;
}
