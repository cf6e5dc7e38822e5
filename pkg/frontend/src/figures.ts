/**
 * The four figure kinds rendered from experiment CSVs:
 *
 *  - phi_overlay:    clone probability phi(t) points with error bars, with
 *                    any quadrature curves overlaid; horizontal reference at
 *                    the crossing level and a vertical t_S line.
 *  - excess_entropy: f^e(t)/alpha curve with error bars and a vertical
 *                    dashed collapse-time line.
 *  - that_hist:      histogram of per-trajectory collapse times t_hat_C.
 *  - rem_branches:   psi_+ / psi_- free-energy branches with the
 *                    condensation time marked.
 *
 * Error bars are 3x the standard error by default (configurable).
 * Rendering is a pure function of the CSV content; nothing is written
 * unless every input validates.
 */

import { writeFileSync } from "node:fs";
import { HashedCsv, numericColumn, readHashedCsv } from "./csv.js";
import {
  DEFAULT_MARGIN,
  Svg,
  extent,
  linearScale,
  padded,
} from "./svg.js";

export type FigureKind =
  | "phi_overlay"
  | "excess_entropy"
  | "that_hist"
  | "rem_branches";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  /** Vertical annotation at the speciation time, if known. */
  tS?: number;
  /** Vertical annotation at the collapse time, if known. */
  tC?: number;
  /** Error bars are mult x SE; the convention is 3. */
  errorBarMult: number;
  /** phi_overlay only: plot against t/t_S instead of t. */
  normalizeByTs: boolean;
  /** Horizontal reference level for phi_overlay crossings. */
  phiLevel: number;
}

export const DEFAULT_FIGURE: Pick<
  FigureSpec,
  "errorBarMult" | "normalizeByTs" | "phiLevel"
> = { errorBarMult: 3, normalizeByTs: false, phiLevel: 0.775 };

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function requireRows(csv: HashedCsv): void {
  if (csv.rows === 0) {
    throw new Error(`${csv.path}: CSV has no data rows; nothing to plot`);
  }
}

function frame(xDomain: [number, number], yDomain: [number, number]) {
  const svg = new Svg();
  const m = DEFAULT_MARGIN;
  const xs = linearScale(xDomain, [m.left, svg.width - m.right]);
  const ys = linearScale(yDomain, [svg.height - m.bottom, m.top]);
  return { svg, xs, ys, m };
}

/** Render to an SVG string; exposed separately so tests can inspect it. */
export function renderToString(spec: FigureSpec): string {
  const csvs = spec.inputs.map(readHashedCsv);
  csvs.forEach(requireRows);
  switch (spec.kind) {
    case "phi_overlay":
      return phiOverlay(spec, csvs);
    case "excess_entropy":
      return excessEntropy(spec, csvs);
    case "that_hist":
      return thatHist(spec, csvs);
    case "rem_branches":
      return remBranches(spec, csvs);
  }
}

/** Validate, render, and write the image file. */
export function render(spec: FigureSpec): void {
  const markup = renderToString(spec);
  writeFileSync(spec.output, markup);
}

function phiOverlay(spec: FigureSpec, csvs: HashedCsv[]): string {
  // Monte-Carlo files carry (phi, stderr); quadrature files carry
  // phi_quadrature.  Either may appear any number of times.
  interface Series {
    x: number[];
    y: number[];
    se?: number[];
    label: string;
  }
  const series: Series[] = [];
  for (const csv of csvs) {
    const isMc = "phi" in csv.columns;
    const isQuad = "phi_quadrature" in csv.columns;
    if (!isMc && !isQuad) {
      throw new Error(
        `${csv.path}: expected a 'phi' (+ 'stderr') or 'phi_quadrature' ` +
          `column (has: ${csv.names.join(", ")})`,
      );
    }
    let x: number[];
    if (spec.normalizeByTs) {
      if ("t_over_ts" in csv.columns) {
        x = numericColumn(csv, "t_over_ts");
      } else if (spec.tS !== undefined) {
        x = numericColumn(csv, "t").map((t) => t / spec.tS!);
      } else {
        throw new Error(
          `${csv.path}: normalization requested but the file has no ` +
            `'t_over_ts' column and no t_S was given`,
        );
      }
    } else {
      x = numericColumn(csv, "t");
    }
    if (isMc) {
      series.push({
        x,
        y: numericColumn(csv, "phi"),
        se: numericColumn(csv, "stderr"),
        label: csv.path.split("/").pop() ?? csv.path,
      });
    } else {
      series.push({
        x,
        y: numericColumn(csv, "phi_quadrature"),
        label: csv.path.split("/").pop() ?? csv.path,
      });
    }
  }
  const allX = series.flatMap((s) => s.x);
  const { svg, xs, ys, m } = frame(padded(...extent(allX)), [0.4, 1.05]);
  const xLabel = spec.normalizeByTs ? "t / t_S" : "t";
  svg.axes(xs, ys, m, xLabel, "phi(t)", "Clone probability phi(t)");
  svg.annotateHorizontal(ys, m, spec.phiLevel, `phi = ${spec.phiLevel}`);
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    if (s.se) {
      s.x.forEach((x, j) => {
        svg.errorBar(xs, ys, x, s.y[j], s.se![j], spec.errorBarMult,
          `class="errorbar" stroke="${color}"`);
        svg.circle(xs(x), ys(s.y[j]), 3.5, `fill="${color}"`);
      });
    } else {
      svg.polyline(
        s.x.map((x, j) => [xs(x), ys(s.y[j])] as [number, number]),
        `stroke="${color}" stroke-width="1.8" class="curve"`,
      );
    }
    svg.text(m.left + 10, m.top + 18 + 16 * i, s.label,
      `fill="${color}" font-size="12"`);
  });
  if (spec.tS !== undefined) {
    const mark = spec.normalizeByTs ? 1.0 : spec.tS;
    svg.annotateVertical(xs, m, mark, "t_S");
  }
  if (spec.tC !== undefined && !spec.normalizeByTs) {
    svg.annotateVertical(xs, m, spec.tC, "t_C", "#a33");
  }
  return svg.toString();
}

function excessEntropy(spec: FigureSpec, csvs: HashedCsv[]): string {
  interface Curve {
    t: number[];
    f: number[];
    se: number[];
    label: string;
  }
  const curves: Curve[] = csvs.map((csv) => {
    const t = numericColumn(csv, "t");
    const fOver = numericColumn(csv, "f_over_alpha");
    const fRaw = numericColumn(csv, "f_excess");
    const seRaw = numericColumn(csv, "s_emp_se");
    // SE of f_excess equals the entropy-estimate SE; rescale it to the
    // f/alpha axis using any row where the ratio is well defined.
    let scale = 1.0;
    for (let j = 0; j < t.length; j++) {
      if (Math.abs(fRaw[j]) > 1e-12 && Math.abs(fOver[j]) > 1e-12) {
        scale = fOver[j] / fRaw[j];
        break;
      }
    }
    return {
      t,
      f: fOver,
      se: seRaw.map((s) => s * scale),
      label: csv.path.split("/").pop() ?? csv.path,
    };
  });
  const allT = curves.flatMap((c) => c.t);
  const allF = curves.flatMap((c) => c.f);
  const [fLo, fHi] = extent(allF);
  const { svg, xs, ys, m } = frame(
    padded(...extent(allT)),
    padded(Math.min(fLo, 0), Math.max(fHi, 1.05)),
  );
  svg.axes(xs, ys, m, "t", "f^e(t) / alpha", "Excess entropy density");
  svg.annotateHorizontal(ys, m, 1.0, "f/alpha = 1");
  svg.annotateHorizontal(ys, m, 0.0, "");
  curves.forEach((c, i) => {
    const color = COLORS[i % COLORS.length];
    svg.polyline(
      c.t.map((t, j) => [xs(t), ys(c.f[j])] as [number, number]),
      `stroke="${color}" stroke-width="1.8" class="curve"`,
    );
    c.t.forEach((t, j) => {
      svg.errorBar(xs, ys, t, c.f[j], c.se[j], spec.errorBarMult,
        `class="errorbar" stroke="${color}"`);
      svg.circle(xs(t), ys(c.f[j]), 3, `fill="${color}"`);
    });
    svg.text(m.left + 10, m.top + 18 + 16 * i, c.label,
      `fill="${color}" font-size="12"`);
  });
  if (spec.tC !== undefined) {
    svg.annotateVertical(xs, m, spec.tC, "t_C", "#a33");
  }
  if (spec.tS !== undefined) {
    svg.annotateVertical(xs, m, spec.tS, "t_S");
  }
  return svg.toString();
}

function thatHist(spec: FigureSpec, csvs: HashedCsv[]): string {
  if (csvs.length !== 1) {
    throw new Error("that_hist takes exactly one CSV (t_hat, count)");
  }
  const csv = csvs[0];
  const tHat = numericColumn(csv, "t_hat");
  const counts = numericColumn(csv, "count");
  const total = counts.reduce((a, b) => a + b, 0);
  const [tLo, tHi] = extent(tHat);
  const width = tHat.length > 1 ? (tHi - tLo) / (tHat.length - 1) : 0.05;
  const maxFrac = Math.max(...counts) / total;
  const { svg, xs, ys, m } = frame(
    padded(tLo - width / 2, tHi + width / 2),
    [0, maxFrac * 1.1],
  );
  svg.axes(xs, ys, m, "t_hat_C", "fraction of trajectories",
    "Empirical collapse times");
  tHat.forEach((t, j) => {
    const frac = counts[j] / total;
    const x0 = xs(t - width / 2);
    const x1 = xs(t + width / 2);
    svg.rect(x0, ys(frac), Math.max(1, x1 - x0 - 1), ys(0) - ys(frac),
      'fill="#1f77b4" class="bar"');
  });
  if (spec.tC !== undefined) {
    svg.annotateVertical(xs, m, spec.tC, "t_C", "#a33");
  }
  if (spec.tS !== undefined) {
    svg.annotateVertical(xs, m, spec.tS, "t_S");
  }
  return svg.toString();
}

function remBranches(spec: FigureSpec, csvs: HashedCsv[]): string {
  if (csvs.length !== 1) {
    throw new Error("rem_branches takes exactly one CSV (t, psi_plus, psi_minus)");
  }
  const csv = csvs[0];
  const t = numericColumn(csv, "t");
  const psiP = numericColumn(csv, "psi_plus");
  const psiM = numericColumn(csv, "psi_minus");
  const [lo, hi] = extent([...psiP, ...psiM]);
  const { svg, xs, ys, m } = frame(padded(...extent(t)), padded(lo, hi));
  svg.axes(xs, ys, m, "t", "psi", "Free-energy branches psi_+ / psi_-");
  svg.polyline(t.map((v, j) => [xs(v), ys(psiP[j])] as [number, number]),
    'stroke="#1f77b4" stroke-width="1.8" class="curve"');
  svg.polyline(t.map((v, j) => [xs(v), ys(psiM[j])] as [number, number]),
    'stroke="#d62728" stroke-width="1.8" class="curve"');
  svg.text(m.left + 10, m.top + 18, "psi_+", 'fill="#1f77b4" font-size="12"');
  svg.text(m.left + 10, m.top + 34, "psi_-", 'fill="#d62728" font-size="12"');
  svg.annotateHorizontal(ys, m, -0.5, "psi = -1/2");
  // The condensation time doubles as the collapse annotation; an explicit
  // --t-c flag overrides the CSV value.
  const tCond = spec.tC ?? ("t_cond" in csv.columns
    ? numericColumn(csv, "t_cond")[0]
    : undefined);
  if (tCond !== undefined) {
    svg.annotateVertical(xs, m, tCond, "t_C", "#a33");
  }
  if (spec.tS !== undefined) {
    svg.annotateVertical(xs, m, spec.tS, "t_S");
  }
  return svg.toString();
}
