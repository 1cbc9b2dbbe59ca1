export { render, SchemaError } from './render.js';
export { parseFigureSpec, figureSpecSchema } from './spec.js';
export type { FigureSpec, LineSpec, HeatmapSpec } from './spec.js';
export { parseCsv, requireColumns } from './csv.js';
