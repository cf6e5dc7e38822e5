/**
 * Minimal SVG scene builder: linear scales, ticked axes, polylines, error
 * bars, and dashed annotation lines.  Output is plain SVG markup, so a
 * re-render of the same data is byte-identical.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_SIZE = { width: 640, height: 440 };
export const DEFAULT_MARGIN: Margin = { top: 40, right: 24, bottom: 52, left: 64 };

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round tick positions covering [lo, hi], ~n of them, at 1/2/5 steps. */
export function ticks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, n);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= rawStep) {
      step = mag * mult;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return parseFloat(v.toPrecision(6)).toString();
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const P = (v: number) => (Math.round(v * 100) / 100).toString();

export class Svg {
  private parts: string[] = [];
  constructor(
    readonly width = DEFAULT_SIZE.width,
    readonly height = DEFAULT_SIZE.height,
  ) {}

  push(markup: string): void {
    this.parts.push(markup);
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs = ""): void {
    this.push(
      `<line x1="${P(x1)}" y1="${P(y1)}" x2="${P(x2)}" y2="${P(y2)}" ${attrs}/>`,
    );
  }

  polyline(pts: Array<[number, number]>, attrs: string): void {
    const s = pts.map(([x, y]) => `${P(x)},${P(y)}`).join(" ");
    this.push(`<polyline fill="none" points="${s}" ${attrs}/>`);
  }

  circle(cx: number, cy: number, r: number, attrs: string): void {
    this.push(`<circle cx="${P(cx)}" cy="${P(cy)}" r="${r}" ${attrs}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: string): void {
    this.push(
      `<rect x="${P(x)}" y="${P(y)}" width="${P(w)}" height="${P(h)}" ${attrs}/>`,
    );
  }

  text(x: number, y: number, s: string, attrs = ""): void {
    this.push(`<text x="${P(x)}" y="${P(y)}" ${attrs}>${esc(s)}</text>`);
  }

  /** Vertical error bar with serif caps, `mult` standard errors each way. */
  errorBar(
    xs: Scale,
    ys: Scale,
    x: number,
    y: number,
    se: number,
    mult: number,
    attrs = 'class="errorbar" stroke="currentColor"',
  ): void {
    const half = mult * se;
    const yTop = ys(y + half);
    const yBot = ys(y - half);
    const cx = xs(x);
    this.line(cx, yTop, cx, yBot, attrs);
    this.line(cx - 3, yTop, cx + 3, yTop, attrs);
    this.line(cx - 3, yBot, cx + 3, yBot, attrs);
  }

  /** Dashed vertical annotation line spanning the plot area, with a label. */
  annotateVertical(
    xs: Scale,
    margin: Margin,
    x: number,
    label: string,
    color = "#555",
  ): void {
    const px = xs(x);
    this.line(
      px,
      margin.top,
      px,
      this.height - margin.bottom,
      `class="annotation" stroke="${color}" stroke-dasharray="6 4"`,
    );
    this.text(px + 4, margin.top + 14, label, `fill="${color}" font-size="13"`);
  }

  /** Dashed horizontal annotation line spanning the plot area, with a label. */
  annotateHorizontal(
    ys: Scale,
    margin: Margin,
    y: number,
    label: string,
    color = "#555",
  ): void {
    const py = ys(y);
    this.line(
      margin.left,
      py,
      this.width - margin.right,
      py,
      `class="annotation" stroke="${color}" stroke-dasharray="6 4"`,
    );
    this.text(this.width - margin.right - 4, py - 5, label,
      `fill="${color}" font-size="13" text-anchor="end"`);
  }

  axes(
    xs: Scale,
    ys: Scale,
    margin: Margin,
    xLabel: string,
    yLabel: string,
    title: string,
  ): void {
    const x0 = margin.left;
    const x1 = this.width - margin.right;
    const y0 = this.height - margin.bottom;
    const y1 = margin.top;
    this.line(x0, y0, x1, y0, 'stroke="black"');
    this.line(x0, y0, x0, y1, 'stroke="black"');
    for (const t of ticks(xs.domain[0], xs.domain[1])) {
      const px = xs(t);
      this.line(px, y0, px, y0 + 5, 'stroke="black"');
      this.text(px, y0 + 19, fmt(t), 'font-size="12" text-anchor="middle"');
    }
    for (const t of ticks(ys.domain[0], ys.domain[1])) {
      const py = ys(t);
      this.line(x0 - 5, py, x0, py, 'stroke="black"');
      this.text(x0 - 8, py + 4, fmt(t), 'font-size="12" text-anchor="end"');
    }
    this.text((x0 + x1) / 2, this.height - 10, xLabel,
      'font-size="14" text-anchor="middle"');
    this.push(
      `<text x="18" y="${P((y0 + y1) / 2)}" font-size="14" text-anchor="middle"` +
        ` transform="rotate(-90 18 ${P((y0 + y1) / 2)})">${esc(yLabel)}</text>`,
    );
    this.text(this.width / 2, 22, title,
      'font-size="16" text-anchor="middle" font-weight="bold"');
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}" ` +
      `font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

/** Pad a data extent so points do not sit on the frame. */
export function padded(lo: number, hi: number, frac = 0.06): [number, number] {
  if (!(hi > lo)) return [lo - 1, hi + 1];
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}
