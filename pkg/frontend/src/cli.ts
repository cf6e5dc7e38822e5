#!/usr/bin/env node
/**
 * Batch figure renderer for experiment CSV outputs.
 *
 *   plot phi <csv...> -o fig.svg [--t-s X] [--normalize] [--level 0.775]
 *   plot entropy <csv...> -o fig.svg [--t-c X]
 *   plot hist <csv> -o fig.svg [--t-c X]
 *   plot rem <csv> -o fig.svg
 *
 * Common flags: --error-mult N (error bars are N x SE, default 3).
 * Exit codes: 0 ok, 1 render/validation failure, 2 usage error.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { DEFAULT_FIGURE, FigureKind, FigureSpec, render } from "./figures.js";

const KIND_BY_COMMAND: Record<string, FigureKind> = {
  phi: "phi_overlay",
  entropy: "excess_entropy",
  hist: "that_hist",
  rem: "rem_branches",
};

export function buildSpec(argv: string[]): FigureSpec {
  const parsed = yargs(argv)
    .usage("plot <phi|entropy|hist|rem> <csv...> -o <img>")
    .command("phi <csv...>", "clone-probability overlay with error bars")
    .command("entropy <csv...>", "excess-entropy curve with t_C line")
    .command("hist <csv...>", "histogram of per-trajectory collapse times")
    .command("rem <csv...>", "free-energy branches psi_+/psi_-")
    .option("o", {
      alias: "output",
      type: "string",
      demandOption: true,
      describe: "output SVG path",
    })
    .option("error-mult", {
      type: "number",
      default: DEFAULT_FIGURE.errorBarMult,
      describe: "error bars span this many standard errors",
    })
    .option("t-s", { type: "number", describe: "speciation time annotation" })
    .option("t-c", { type: "number", describe: "collapse time annotation" })
    .option("normalize", {
      type: "boolean",
      default: false,
      describe: "phi only: plot against t/t_S",
    })
    .option("level", {
      type: "number",
      default: DEFAULT_FIGURE.phiLevel,
      describe: "phi only: horizontal reference level",
    })
    .demandCommand(1, "a figure kind (phi|entropy|hist|rem) is required")
    .strict()
    .exitProcess(false)
    .parseSync();

  const command = String(parsed._[0]);
  const kind = KIND_BY_COMMAND[command];
  if (!kind) {
    throw new UsageError(`unknown figure kind '${command}'`);
  }
  const inputs = (parsed.csv as string[] | undefined) ?? [];
  if (inputs.length === 0) {
    throw new UsageError("at least one input CSV is required");
  }
  if (!(parsed.errorMult! > 0)) {
    throw new UsageError("--error-mult must be positive");
  }
  return {
    kind,
    inputs: inputs.map(String),
    output: parsed.o,
    tS: parsed.tS as number | undefined,
    tC: parsed.tC as number | undefined,
    errorBarMult: parsed.errorMult as number,
    normalizeByTs: Boolean(parsed.normalize),
    phiLevel: parsed.level as number,
  };
}

export class UsageError extends Error {}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = buildSpec(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    render(spec);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  process.argv[1].endsWith("cli.js") &&
  import.meta.url.endsWith("/cli.js");
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
