/**
 * Landscape-family figure: smoothed objectives for several step sizes
 * overlaid on the raw objective, darker blue meaning stronger smoothing,
 * with a marker at each curve's minimum row.
 */

import { basename } from "path";
import { Artifact, column, numbers, requireColumns, SchemaError } from "./csv.js";
import { LABEL, drawFrame, Panel, xAxis, yAxis } from "./axes.js";
import { Svg, extent, linearScale, padded, px } from "./svg.js";

function etaOf(a: Artifact): number | null {
  const raw = a.header["eta"];
  if (raw === undefined) return null;
  const x = Number(raw);
  return Number.isFinite(x) ? x : null;
}

function shade(rank: number, count: number): string {
  // lighter-to-darker blues with increasing smoothing
  const t = count <= 1 ? 1 : rank / (count - 1);
  const ch = Math.round(210 - 160 * t);
  const hex = ch.toString(16).padStart(2, "0");
  return `#${hex}${hex}ff`;
}

export function renderFamily(landscapes: Artifact[], title?: string): string {
  if (landscapes.length < 1) {
    throw new SchemaError("family needs at least one landscape CSV");
  }
  const parsed = landscapes.map((a) => {
    const [vi, fi, Fi] = requireColumns(a, ["v", "f", "F"]);
    requireColumns(a, ["Fgrad"]);
    return {
      artifact: a,
      vRaw: column(a, vi), fRaw: column(a, fi), FRaw: column(a, Fi),
      v: numbers(column(a, vi)), f: numbers(column(a, fi)), F: numbers(column(a, Fi)),
      eta: etaOf(a),
    };
  });
  const ordered = [...parsed].sort((p, q) => (p.eta ?? 0) - (q.eta ?? 0));

  const width = 800;
  const height = 500;
  const panel: Panel = { left: 70, right: width - 25, top: 35, bottom: height - 55 };
  const allV = ordered.flatMap((p) => p.v);
  const allY = ordered.flatMap((p) => [...p.f, ...p.F]);
  const x = linearScale(extent(allV), [panel.left, panel.right]);
  const y = linearScale(padded(extent(allY)), [panel.bottom, panel.top]);

  const svg = new Svg(width, height);
  svg.text(width / 2, 20, title ?? "smoothed landscape family (darker is smoother)",
    { ...LABEL, "font-size": "14", "text-anchor": "middle" });
  drawFrame(svg, panel);
  xAxis(svg, panel, x, "v");
  yAxis(svg, panel, y, "objective");

  // the raw objective, once, from the first input
  const base = ordered[0];
  svg.open("g", { id: "curve-f", "data-x": base.vRaw.join(" "), "data-y": base.fRaw.join(" ") });
  svg.polyline(base.v.map((vv, i) => [x(vv), y(base.f[i])]),
    { stroke: "#2e8b57", "stroke-width": "1.8" });
  svg.close();
  svg.text(panel.right - 8, panel.top + 14, "f", { ...LABEL, fill: "#2e8b57", "text-anchor": "end" });

  ordered.forEach((p, rank) => {
    if (p.eta === 0) {
      return; // an eta=0 input is the raw objective itself
    }
    const label = p.eta !== null
      ? `eta=${p.artifact.header["eta"]}`
      : basename(p.artifact.path);
    const color = shade(rank, ordered.length);
    let argmin = 0;
    for (let i = 1; i < p.F.length; i++) {
      if (p.F[i] < p.F[argmin]) argmin = i;
    }
    svg.open("g", { id: `curve-F-${rank}`, "data-eta": p.artifact.header["eta"] ?? "",
      "data-x": p.vRaw.join(" "), "data-y": p.FRaw.join(" ") });
    svg.polyline(p.v.map((vv, i) => [x(vv), y(p.F[i])]), { stroke: color, "stroke-width": "1.5" });
    svg.leaf("circle", { cx: px(x(p.v[argmin])), cy: px(y(p.F[argmin])), r: "4",
      fill: color, stroke: "#303030", "stroke-width": "0.8",
      "data-v": p.vRaw[argmin], "data-F": p.FRaw[argmin] });
    svg.close();
    svg.text(panel.right - 8, panel.top + 28 + 14 * rank, label,
      { ...LABEL, fill: color, "text-anchor": "end" });
  });
  return svg.render();
}
