export { readHashedCsv, numericColumn } from "./csv.js";
export type { HashedCsv } from "./csv.js";
export {
  render,
  renderToString,
  DEFAULT_FIGURE,
} from "./figures.js";
export type { FigureKind, FigureSpec } from "./figures.js";
export { main, buildSpec, UsageError } from "./cli.js";
