/**
 * Minimal deterministic SVG emission.
 *
 * Elements are appended in call order, attributes render in the order given,
 * and pixel values go through one fixed formatter, so identical inputs give
 * byte-identical documents. Marks carry the raw CSV strings they were drawn
 * from in data-* attributes, which makes "the plotted value is exactly what
 * the file says" checkable by grep.
 */

export function px(x: number): string {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

function escapeAttr(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");
}

function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export type Attrs = Record<string, string>;

export class Svg {
  private parts: string[] = [];
  private stack: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  private attrString(attrs: Attrs): string {
    return Object.entries(attrs)
      .map(([k, v]) => ` ${k}="${escapeAttr(v)}"`)
      .join("");
  }

  open(tag: string, attrs: Attrs = {}): void {
    this.parts.push(`<${tag}${this.attrString(attrs)}>`);
    this.stack.push(tag);
  }

  close(): void {
    const tag = this.stack.pop();
    if (!tag) throw new Error("unbalanced close()");
    this.parts.push(`</${tag}>`);
  }

  leaf(tag: string, attrs: Attrs): void {
    this.parts.push(`<${tag}${this.attrString(attrs)}/>`);
  }

  text(x: number, y: number, content: string, attrs: Attrs = {}): void {
    this.parts.push(
      `<text x="${px(x)}" y="${px(y)}"${this.attrString(attrs)}>${escapeText(content)}</text>`,
    );
  }

  polyline(points: Array<[number, number]>, attrs: Attrs): void {
    const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
    this.leaf("polyline", { points: pts, fill: "none", ...attrs });
  }

  render(): string {
    if (this.stack.length > 0) throw new Error(`unclosed <${this.stack.at(-1)}>`);
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round-valued ticks covering the domain, at most `count + 2` of them. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count + 1) ?? 10 * mag;
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return out;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo <= hi)) throw new Error("empty extent");
  return [lo, hi];
}

export function padded(e: [number, number], frac = 0.05): [number, number] {
  const pad = (e[1] - e[0] || 1) * frac;
  return [e[0] - pad, e[1] + pad];
}
