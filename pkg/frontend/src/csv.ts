/**
 * CSV ingestion for the toolkit's artifacts: `# key: value` comment headers
 * followed by a column header line and numeric rows.
 */
import { readFileSync } from "fs";

export interface CsvTable {
  metadata: Record<string, string>;
  columns: string[];
  rows: number[][];
}

export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf-8");
  const metadata: Record<string, string> = {};
  let columns: string[] | null = null;
  const rows: number[][] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const idx = line.indexOf(":");
      if (idx > 0) {
        metadata[line.slice(1, idx).trim()] = line.slice(idx + 1).trim();
      }
      continue;
    }
    if (columns === null) {
      columns = line.split(",").map((c) => c.trim());
      continue;
    }
    rows.push(line.split(",").map(Number));
  }
  if (columns === null) {
    throw new Error(`no header line found in ${path}`);
  }
  return { metadata, columns, rows };
}

/** Extract a named column, failing with the column name if absent. */
export function column(table: CsvTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `missing column '${name}' (have: ${table.columns.join(", ")})`
    );
  }
  return table.rows.map((r) => r[idx]);
}

export function requireColumns(table: CsvTable, names: string[]): void {
  for (const n of names) {
    if (!table.columns.includes(n)) {
      throw new Error(
        `missing column '${n}' (have: ${table.columns.join(", ")})`
      );
    }
  }
}
