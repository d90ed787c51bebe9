/** CSV reading with schema validation for the metric files. */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {
  constructor(file: string, detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
  }
}

export interface Table {
  header: string[];
  /** column name -> values (numeric columns parsed, others kept as strings) */
  columns: Map<string, number[] | string[]>;
  rows: number;
}

export function parseCsv(path: string, text: string): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new SchemaError(path, "empty file");
  const header = lines[0].split(",").map((h) => h.trim());
  const raw: string[][] = header.map(() => []);
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(path, `row ${i + 1} has ${cells.length} fields, expected ${header.length}`);
    }
    cells.forEach((cell, j) => raw[j].push(cell));
  }
  const columns = new Map<string, number[] | string[]>();
  header.forEach((name, j) => {
    const values = raw[j];
    const numeric = values.map(Number);
    columns.set(name, numeric.some(Number.isNaN) ? values : numeric);
  });
  return { header, columns, rows: lines.length - 1 };
}

export function readCsv(path: string): Table {
  return parseCsv(path, readFileSync(path, "utf-8"));
}

export function numericColumn(table: Table, file: string, name: string): number[] {
  const column = table.columns.get(name);
  if (column === undefined) throw new SchemaError(file, `missing column '${name}'`);
  if (column.length > 0 && typeof column[0] !== "number") {
    throw new SchemaError(file, `column '${name}' is not numeric`);
  }
  return column as number[];
}

export function stringColumn(table: Table, file: string, name: string): string[] {
  const column = table.columns.get(name);
  if (column === undefined) throw new SchemaError(file, `missing column '${name}'`);
  return column.map(String);
}
