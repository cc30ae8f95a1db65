/**
 * Readers for the experiment CSV files.
 *
 * Every file starts with a `# schema=<name>` line followed by a column
 * header. Parsing is strict about the schema version and required columns;
 * unknown columns are ignored with a warning.
 */

import Papa from "papaparse";

export interface Table {
  schema: string;
  header: string[];
  rows: Record<string, string>[];
  source: string;
}

export class CsvError extends Error {}

export function parseTable(text: string, source: string): Table {
  const newline = text.indexOf("\n");
  const first = newline < 0 ? text : text.slice(0, newline);
  const match = first.match(/^# schema=(\S+)\s*$/);
  if (!match) {
    throw new CsvError(`${source}: missing '# schema=...' header line`);
  }
  const schema = match[1];
  const body = newline < 0 ? "" : text.slice(newline + 1);
  const parsed = Papa.parse<Record<string, string>>(body.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fatal = parsed.errors.filter((e) => e.code !== "TooFewFields");
  if (fatal.length > 0) {
    throw new CsvError(`${source}: ${fatal[0].message}`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.length === 0) {
    throw new CsvError(`${source}: missing column header`);
  }
  return { schema, header, rows: parsed.data, source };
}

export function requireSchema(table: Table, expected: string): void {
  if (table.schema !== expected) {
    throw new CsvError(
      `${table.source}: schema ${table.schema} does not match expected ${expected}`,
    );
  }
}

export function requireColumns(table: Table, columns: string[]): void {
  const missing = columns.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new CsvError(`${table.source}: missing columns: ${missing.join(", ")}`);
  }
  const unknown = table.header.filter((c) => !columns.includes(c));
  if (unknown.length > 0) {
    console.error(`warning: ${table.source}: ignoring columns ${unknown.join(", ")}`);
  }
  if (table.rows.length === 0) {
    throw new CsvError(`${table.source}: no data rows`);
  }
}

export function numeric(row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  if (!Number.isFinite(value)) {
    throw new CsvError(`non-numeric value '${row[column]}' in column ${column}`);
  }
  return value;
}
