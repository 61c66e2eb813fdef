/**
 * Log-log error-versus-step-size figure with fitted slope annotations for
 * the tail-averaged and plain estimators. Slopes are recomputed from the
 * CSV values for display only.
 */

import { Artifact, column, numbers, requireColumns, SchemaError } from "./csv.js";
import { LABEL, drawFrame, Panel, xAxis, yAxis } from "./axes.js";
import { Svg, extent, linearScale, padded, px } from "./svg.js";

export function fitSlope(xs: number[], ys: number[]): number {
  const lx = xs.map(Math.log);
  const ly = ys.map(Math.log);
  const mx = lx.reduce((a, b) => a + b, 0) / lx.length;
  const my = ly.reduce((a, b) => a + b, 0) / ly.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < lx.length; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) ** 2;
  }
  return num / den;
}

interface Series {
  id: string;
  label: string;
  color: string;
  ysRaw: string[];
  ys: number[];
  seRaw: string[];
}

export function renderSweep(sweep: Artifact, title?: string): string {
  const [etaI, tailI, seI, mseI, se2I] = requireColumns(
    sweep, ["eta", "mean_abs_tailavg", "se", "sqrt_time_avg_mse", "se2"]);
  if (sweep.rows.length < 2) {
    throw new SchemaError(`${sweep.path}: sweep needs at least 2 rows`);
  }
  const etasRaw = column(sweep, etaI);
  const etas = numbers(etasRaw);
  const series: Series[] = [
    { id: "series-averaged", label: "tail-averaged", color: "#1f77b4",
      ysRaw: column(sweep, tailI), ys: numbers(column(sweep, tailI)),
      seRaw: column(sweep, seI) },
    { id: "series-sgd", label: "plain sgd", color: "#d62728",
      ysRaw: column(sweep, mseI), ys: numbers(column(sweep, mseI)),
      seRaw: column(sweep, se2I) },
  ];
  for (const s of series) {
    if (s.ys.some((y) => !(y > 0)) || etas.some((e) => !(e > 0))) {
      throw new SchemaError(`${sweep.path}: log-log plot needs positive values`);
    }
  }

  const width = 800;
  const height = 500;
  const panel: Panel = { left: 80, right: width - 25, top: 35, bottom: height - 55 };
  const lx = etas.map(Math.log10);
  const ly = series.flatMap((s) => s.ys.map(Math.log10));
  const x = linearScale(padded(extent(lx), 0.08), [panel.left, panel.right]);
  const y = linearScale(padded(extent(ly), 0.08), [panel.bottom, panel.top]);

  const svg = new Svg(width, height);
  svg.text(width / 2, 20, title ?? "error scaling with the step size",
    { ...LABEL, "font-size": "14", "text-anchor": "middle" });
  drawFrame(svg, panel);
  xAxis(svg, panel, x, "step size (log10)", true);
  yAxis(svg, panel, y, "error (log10)", true);

  series.forEach((s, k) => {
    const slope = fitSlope(etas, s.ys);
    svg.open("g", { id: s.id, "data-eta": etasRaw.join(" "), "data-y": s.ysRaw.join(" "),
      "data-se": s.seRaw.join(" "), "data-slope": slope.toFixed(4) });
    svg.polyline(etas.map((e, i) => [x(Math.log10(e)), y(Math.log10(s.ys[i]))]),
      { stroke: s.color, "stroke-width": "1.5" });
    etas.forEach((e, i) => {
      svg.leaf("circle", { cx: px(x(Math.log10(e))), cy: px(y(Math.log10(s.ys[i]))),
        r: "3.5", fill: s.color, "data-eta": etasRaw[i], "data-y": s.ysRaw[i] });
    });
    svg.close();
    svg.text(panel.left + 12, panel.top + 18 + 16 * k,
      `${s.label}: slope ${slope.toFixed(2)}`, { ...LABEL, fill: s.color });
  });
  return svg.render();
}
