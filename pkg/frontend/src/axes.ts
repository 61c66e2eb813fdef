/** Shared frame/axis drawing for all three figure kinds. */

import { Attrs, Scale, Svg, px, ticks } from "./svg.js";

export const FRAME: Attrs = { stroke: "#606060", "stroke-width": "1" };
export const GRID: Attrs = { stroke: "#dddddd", "stroke-width": "0.5" };
export const LABEL: Attrs = { "font-family": "sans-serif", "font-size": "11", fill: "#303030" };

export interface Panel {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export function drawFrame(svg: Svg, p: Panel): void {
  svg.leaf("rect", {
    x: px(p.left), y: px(p.top),
    width: px(p.right - p.left), height: px(p.bottom - p.top),
    fill: "none", ...FRAME,
  });
}

export function xAxis(svg: Svg, p: Panel, scale: Scale, label: string, log = false): void {
  for (const t of ticks(scale.domain)) {
    const x = scale(t);
    svg.leaf("line", { x1: px(x), y1: px(p.top), x2: px(x), y2: px(p.bottom), ...GRID });
    const text = log ? `1e${t}` : trimTick(t);
    svg.text(x, p.bottom + 14, text, { ...LABEL, "text-anchor": "middle" });
  }
  svg.text((p.left + p.right) / 2, p.bottom + 30, label, { ...LABEL, "text-anchor": "middle" });
}

export function yAxis(svg: Svg, p: Panel, scale: Scale, label: string, log = false): void {
  for (const t of ticks(scale.domain)) {
    const y = scale(t);
    svg.leaf("line", { x1: px(p.left), y1: px(y), x2: px(p.right), y2: px(y), ...GRID });
    const text = log ? `1e${t}` : trimTick(t);
    svg.text(p.left - 6, y + 4, text, { ...LABEL, "text-anchor": "end" });
  }
  svg.text(p.left - 40, (p.top + p.bottom) / 2, label, {
    ...LABEL,
    "text-anchor": "middle",
    transform: `rotate(-90 ${px(p.left - 40)} ${px((p.top + p.bottom) / 2)})`,
  });
}

function trimTick(t: number): string {
  const s = t.toPrecision(6);
  return String(Number(s));
}
