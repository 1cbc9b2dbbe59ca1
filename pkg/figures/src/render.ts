import { parseCsv, requireColumns, numericColumn, SchemaError, Table } from './csv.js';
import { FigureSpec, HeatmapSpec, LineSpec } from './spec.js';
import {
  DEFAULT_FRAME,
  LinearScale,
  LogScale,
  PALETTE,
  axes,
  colormap,
  extentOf,
  fmt,
  logTicks,
  niceTicks,
  svgDocument,
} from './svg.js';

export { SchemaError } from './csv.js';

export function render(spec: FigureSpec, csvText: string): string {
  const table = parseCsv(csvText);
  return spec.kind === 'line' ? renderLine(spec, table) : renderHeatmap(spec, table);
}

function groupBy(table: Table, column: string | undefined): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  table.rows.forEach((row, i) => {
    const key = column ? row[column] ?? '' : '';
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(i);
  });
  return groups;
}

function renderLine(spec: LineSpec, table: Table): string {
  const needed = [spec.xColumn, spec.yColumn];
  if (spec.seriesColumn) needed.push(spec.seriesColumn);
  requireColumns(table, needed);
  const xsAll = numericColumn(table, spec.xColumn);
  const ysAll = numericColumn(table, spec.yColumn);
  const finite = ysAll.filter((v) => Number.isFinite(v) && (!spec.logY || v > 0));
  if (finite.length === 0) throw new SchemaError(`column '${spec.yColumn}' has no plottable values`);

  const frame = DEFAULT_FRAME;
  const xExt = extentOf(xsAll);
  let yExt = extentOf(spec.logY ? finite : ysAll.filter(Number.isFinite));
  if (spec.thresholdDb !== undefined && !spec.logY) {
    yExt = { min: Math.min(yExt.min, spec.thresholdDb), max: Math.max(yExt.max, spec.thresholdDb) };
  }
  const xs = new LinearScale(xExt, [frame.left, frame.width - frame.right]);
  const yRange: [number, number] = [frame.height - frame.bottom, frame.top];
  const ys = spec.logY ? new LogScale(yExt, yRange) : new LinearScale(yExt, yRange);
  const yTicks = spec.logY ? logTicks(yExt) : niceTicks(yExt);

  const body = axes(frame, xs, (v) => ys.map(v), niceTicks(xExt), yTicks,
    spec.xLabel, spec.yLabel, spec.title);

  const groups = [...groupBy(table, spec.seriesColumn).entries()].sort((a, b) =>
    a[0].localeCompare(b[0]),
  );
  groups.forEach(([name, idx], gi) => {
    const color = PALETTE[gi % PALETTE.length];
    const pts = idx
      .map((i) => [xsAll[i], ysAll[i]] as const)
      .filter(([, y]) => Number.isFinite(y) && (!spec.logY || y > 0))
      .sort((a, b) => a[0] - b[0])
      .map(([x, y]) => `${fmt(xs.map(x))},${fmt(ys.map(y))}`);
    if (pts.length === 0) return;
    body.push(`<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    const ly = frame.top + 16 * gi + 10;
    const lx = frame.width - frame.right + 12;
    body.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="2"/>`);
    body.push(`<text x="${lx + 28}" y="${ly + 4}" font-size="11">${name || spec.yColumn}</text>`);
  });

  if (spec.thresholdDb !== undefined) {
    const py = ys.map(spec.thresholdDb);
    body.push(
      `<line x1="${frame.left}" y1="${fmt(py)}" x2="${frame.width - frame.right}" y2="${fmt(py)}" stroke="#d55e00" stroke-width="1.5" stroke-dasharray="6 4"/>`,
    );
    body.push(
      `<text x="${frame.width - frame.right - 4}" y="${fmt(py - 5)}" text-anchor="end" font-size="11" fill="#d55e00">threshold</text>`,
    );
  }
  return svgDocument(frame, body);
}

function renderHeatmap(spec: HeatmapSpec, table: Table): string {
  requireColumns(table, [spec.xColumn, spec.yColumn, spec.valueColumn]);
  const xv = numericColumn(table, spec.xColumn);
  const yv = numericColumn(table, spec.yColumn);
  const vv = numericColumn(table, spec.valueColumn);
  const xsU = [...new Set(xv)].sort((a, b) => a - b);
  const ysU = [...new Set(yv)].sort((a, b) => a - b);
  const cw = xsU.length > 1 ? xsU[1] - xsU[0] : 1;
  const ch = ysU.length > 1 ? ysU[1] - ysU[0] : 1;

  const frame = DEFAULT_FRAME;
  const xExt = { min: xsU[0] - cw / 2, max: xsU[xsU.length - 1] + cw / 2 };
  const yExt = { min: ysU[0] - ch / 2, max: ysU[ysU.length - 1] + ch / 2 };
  const xs = new LinearScale(xExt, [frame.left, frame.width - frame.right]);
  const ys = new LinearScale(yExt, [frame.height - frame.bottom, frame.top]);

  const body: string[] = [];
  const span = spec.scaleMax - spec.scaleMin;
  for (let i = 0; i < xv.length; i++) {
    if (!Number.isFinite(xv[i]) || !Number.isFinite(yv[i])) continue;
    const t = (vv[i] - spec.scaleMin) / span;
    const px = xs.map(xv[i] - cw / 2);
    const py = ys.map(yv[i] + ch / 2);
    const w = xs.map(xv[i] + cw / 2) - px;
    const h = ys.map(yv[i] - ch / 2) - py;
    body.push(
      `<rect x="${fmt(px)}" y="${fmt(py)}" width="${fmt(w)}" height="${fmt(h)}" fill="${colormap(Number.isFinite(vv[i]) ? t : NaN)}"/>`,
    );
  }
  body.push(...axes(frame, xs, (v) => ys.map(v), niceTicks(xExt), niceTicks(yExt),
    spec.xLabel, spec.yLabel, spec.title));

  if (spec.marker) {
    const [mx, my] = spec.marker;
    body.push(
      `<rect x="${fmt(xs.map(mx) - 5)}" y="${fmt(ys.map(my) - 5)}" width="10" height="10" fill="none" stroke="#00a000" stroke-width="2.5"/>`,
    );
  }

  // colorbar with the fixed scale
  const cbX = frame.width - frame.right + 30;
  const cbTop = frame.top;
  const cbH = frame.height - frame.bottom - frame.top;
  const steps = 40;
  for (let i = 0; i < steps; i++) {
    const t0 = i / steps;
    const y = cbTop + cbH * (1 - (i + 1) / steps);
    body.push(
      `<rect x="${cbX}" y="${fmt(y)}" width="16" height="${fmt(cbH / steps + 0.5)}" fill="${colormap(t0 + 0.5 / steps)}"/>`,
    );
  }
  body.push(`<rect x="${cbX}" y="${cbTop}" width="16" height="${fmt(cbH)}" fill="none" stroke="#222"/>`);
  for (const t of [0, 0.5, 1]) {
    const y = cbTop + cbH * (1 - t);
    body.push(
      `<text x="${cbX + 22}" y="${fmt(y + 4)}" font-size="11">${fmt(spec.scaleMin + t * span)}</text>`,
    );
  }
  return svgDocument(frame, body);
}
