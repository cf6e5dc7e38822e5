/**
 * Reader for the hashed CSV files the experiment CLI emits.
 *
 * Layout: line 1 is `# name1,name2,...`, line 2 is `# manifest=<16 hex>`,
 * followed by one data row per line.  Files without the manifest stamp are
 * refused: every figure must be traceable to the run that produced it.
 */

import { readFileSync } from "node:fs";

export interface HashedCsv {
  /** Column names in file order. */
  names: string[];
  /** 16-hex-digit manifest hash from the header. */
  digest: string;
  /** Numeric columns; non-numeric columns are kept as strings. */
  columns: Record<string, number[] | string[]>;
  /** Number of data rows. */
  rows: number;
  /** Source path, for error messages. */
  path: string;
}

const MANIFEST_RE = /^# manifest=([0-9a-f]{16})$/;

export function readHashedCsv(path: string): HashedCsv {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/);
  if (lines.length < 2 || !lines[0].startsWith("# ")) {
    throw new Error(`${path}: not a hashed CSV (missing '# name,...' header)`);
  }
  const m = MANIFEST_RE.exec(lines[1]);
  if (!m) {
    throw new Error(
      `${path}: missing '# manifest=<hash>' header; ` +
        `refusing a CSV with no provenance stamp`,
    );
  }
  const names = lines[0].slice(2).split(",");
  const digest = m[1];
  const dataLines = lines.slice(2).filter((ln) => ln.trim() !== "");
  const raw: string[][] = names.map(() => []);
  for (const ln of dataLines) {
    const cells = ln.split(",");
    if (cells.length !== names.length) {
      throw new Error(
        `${path}: row has ${cells.length} cells, expected ${names.length}`,
      );
    }
    cells.forEach((c, j) => raw[j].push(c));
  }
  const columns: Record<string, number[] | string[]> = {};
  names.forEach((name, j) => {
    const nums = raw[j].map(Number);
    columns[name] = nums.every((v) => !Number.isNaN(v)) ? nums : raw[j];
  });
  return { names, digest, columns, rows: dataLines.length, path };
}

/** Fetch a numeric column or fail with a message naming file and column. */
export function numericColumn(csv: HashedCsv, name: string): number[] {
  const col = csv.columns[name];
  if (col === undefined) {
    throw new Error(
      `${csv.path}: missing required column '${name}' ` +
        `(has: ${csv.names.join(", ")})`,
    );
  }
  if (col.length > 0 && typeof col[0] !== "number") {
    throw new Error(`${csv.path}: column '${name}' is not numeric`);
  }
  return col as number[];
}
