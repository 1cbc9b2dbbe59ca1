import Papa from 'papaparse';

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export class SchemaError extends Error {}

// The harness CSVs are self-describing: the first row is the column header.
export function parseCsv(text: string): Table {
  const result = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const columns = result.meta.fields ?? [];
  if (columns.length === 0 || result.data.length === 0) {
    throw new SchemaError('CSV is empty: no header or no data rows');
  }
  return { columns, rows: result.data };
}

export function requireColumns(table: Table, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new SchemaError(`CSV is missing required column '${col}' (has: ${table.columns.join(', ')})`);
    }
  }
}

export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((r) => {
    const v = r[name];
    if (v === undefined || v === '') return NaN;
    return Number(v);
  });
}
