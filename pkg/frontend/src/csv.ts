/**
 * Parser for the simulator's CSV outputs: `# key: value` comment headers,
 * one column-name row, then data rows. A few schemas mix strings into
 * otherwise numeric columns (the `axis` column of marginals, the stat tags
 * in the HOM footer), so cells stay strings here and helpers pull typed
 * columns out.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface CsvTable {
  path: string;
  meta: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseCsvText(text: string, path = "<csv>"): CsvTable {
  const meta: Record<string, string> = {};
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  let headerIndex = -1;
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line.startsWith("#")) {
      const m = line.slice(1).match(/^\s*([^:]+):\s*(.*)$/);
      if (m) meta[m[1].trim()] = m[2];
      continue;
    }
    headerIndex = i;
    break;
  }
  if (headerIndex < 0) {
    throw new SchemaError(`${path}: no header row found (empty data file?)`);
  }
  const columns = lines[headerIndex].split(",");
  const rows = lines.slice(headerIndex + 1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== columns.length) {
      throw new SchemaError(
        `${path}: row with ${row.length} cells does not match ${columns.length} columns`,
      );
    }
  }
  return { path, meta, columns, rows };
}

export function readCsv(path: string): CsvTable {
  return parseCsvText(readFileSync(path, "utf-8"), path);
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(
      `${table.path}: missing column ${JSON.stringify(name)} ` +
        `(have: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

/** Rows whose cells in the given column parse as finite numbers. */
export function numericRows(table: CsvTable, column: string): string[][] {
  const idx = columnIndex(table, column);
  return table.rows.filter((row) => Number.isFinite(Number(row[idx])));
}

export function numbersFrom(rows: string[][], idx: number): number[] {
  return rows.map((row) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`non-numeric cell ${JSON.stringify(row[idx])}`);
    }
    return v;
  });
}

/** HOM traces carry three footer rows per angle, tagged in the tau column. */
export const HOM_STAT_TAGS = ["dip_center_fs", "dip_fwhm_fs", "visibility"] as const;

export interface HomBlock {
  theta: number;
  rows: string[][];
  stats: Record<string, number[]>;
}

export function splitHomBlocks(table: CsvTable): HomBlock[] {
  const thetaIdx = columnIndex(table, "theta_deg");
  const tauIdx = columnIndex(table, "tau_fs");
  const blocks = new Map<number, HomBlock>();
  for (const row of table.rows) {
    const theta = Number(row[thetaIdx]);
    let block = blocks.get(theta);
    if (!block) {
      block = { theta, rows: [], stats: {} };
      blocks.set(theta, block);
    }
    const tag = row[tauIdx];
    if ((HOM_STAT_TAGS as readonly string[]).includes(tag)) {
      block.stats[tag] = row.slice(tauIdx + 1).map(Number);
    } else {
      block.rows.push(row);
    }
  }
  return [...blocks.values()];
}
