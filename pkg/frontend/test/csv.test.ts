import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { numericColumn, readHashedCsv } from "../src/csv.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function tmpCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
  const p = join(dir, "file.csv");
  writeFileSync(p, content);
  return p;
}

describe("readHashedCsv", () => {
  it("reads a real CLI output with its manifest hash", () => {
    const csv = readHashedCsv(join(FIXTURES, "spec", "speciation.csv"));
    expect(csv.names).toEqual(["t", "t_over_ts", "phi", "stderr", "n_clones"]);
    expect(csv.digest).toMatch(/^[0-9a-f]{16}$/);
    expect(csv.rows).toBe(12);
    const phi = numericColumn(csv, "phi");
    expect(phi.every((v) => v >= 0 && v <= 1)).toBe(true);
  });

  it("keeps non-numeric columns as strings", () => {
    const csv = readHashedCsv(join(FIXTURES, "rem", "rem.csv"));
    const branch = csv.columns["branch"];
    expect(typeof branch[0]).toBe("string");
    expect(new Set(branch as string[])).toEqual(
      new Set(["annealed", "condensed"]),
    );
  });

  it("refuses a CSV without the manifest stamp", () => {
    const p = tmpCsv("# t,phi\n0.1,0.9\n");
    expect(() => readHashedCsv(p)).toThrow(/manifest/);
  });

  it("refuses a headerless CSV", () => {
    const p = tmpCsv("t,phi\n0.1,0.9\n");
    expect(() => readHashedCsv(p)).toThrow(/hashed CSV/);
  });

  it("refuses a malformed manifest hash", () => {
    const p = tmpCsv("# t,phi\n# manifest=nothex\n0.1,0.9\n");
    expect(() => readHashedCsv(p)).toThrow(/manifest/);
  });

  it("rejects ragged rows", () => {
    const p = tmpCsv("# t,phi\n# manifest=0123456789abcdef\n0.1\n");
    expect(() => readHashedCsv(p)).toThrow(/cells/);
  });

  it("names the missing column in errors", () => {
    const csv = readHashedCsv(join(FIXTURES, "gm", "gm_phi.csv"));
    expect(() => numericColumn(csv, "stderr")).toThrow(/'stderr'/);
  });
});
