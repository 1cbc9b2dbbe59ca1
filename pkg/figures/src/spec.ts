import { z } from 'zod';

// Figure description: which CSV to read, how to draw it, where to write it.
// Heatmaps carry a fixed color scale so reruns stay visually comparable.

export const lineSpecSchema = z.object({
  kind: z.literal('line'),
  input: z.string(),
  output: z.string(),
  xColumn: z.string(),
  yColumn: z.string(),
  seriesColumn: z.string().optional(),
  xLabel: z.string().default(''),
  yLabel: z.string().default(''),
  title: z.string().default(''),
  logY: z.boolean().default(false),
  thresholdDb: z.number().optional(),
});

export const heatmapSpecSchema = z.object({
  kind: z.literal('heatmap'),
  input: z.string(),
  output: z.string(),
  xColumn: z.string().default('x_m'),
  yColumn: z.string().default('y_m'),
  valueColumn: z.string().default('value'),
  xLabel: z.string().default(''),
  yLabel: z.string().default(''),
  title: z.string().default(''),
  scaleMin: z.number(),
  scaleMax: z.number(),
  marker: z.tuple([z.number(), z.number()]).optional(),
});

export const figureSpecSchema = z.discriminatedUnion('kind', [
  lineSpecSchema,
  heatmapSpecSchema,
]);

export type LineSpec = z.infer<typeof lineSpecSchema>;
export type HeatmapSpec = z.infer<typeof heatmapSpecSchema>;
export type FigureSpec = z.infer<typeof figureSpecSchema>;

export function parseFigureSpec(jsonText: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(jsonText);
  } catch (err) {
    throw new Error(`figure spec is not valid JSON: ${(err as Error).message}`);
  }
  const parsed = figureSpecSchema.safeParse(raw);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    throw new Error(`invalid figure spec: ${issue.path.join('.')}: ${issue.message}`);
  }
  return parsed.data;
}
