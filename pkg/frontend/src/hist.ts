/**
 * Histogram-over-landscape figure: the objective and its smoothed companion
 * as curves, with the ensemble's final iterates and tail averages binned
 * underneath — the convergent-points view of one experiment.
 */

import { Artifact, classify, column, numbers, requireColumns, SchemaError } from "./csv.js";
import { LABEL, drawFrame, Panel, xAxis, yAxis } from "./axes.js";
import { Svg, extent, linearScale, padded, px } from "./svg.js";

export const HIST_BINS = 101;

export interface HistInputs {
  trials: Artifact;
  landscape: Artifact;
  title?: string;
}

export function pickHistInputs(artifacts: Artifact[], title?: string): HistInputs {
  const trials = artifacts.find((a) => classify(a) === "trials");
  const landscape = artifacts.find((a) => classify(a) === "landscape");
  if (!trials) {
    throw new SchemaError("hist needs a trials CSV; missing column 'trial_id'");
  }
  if (!landscape) {
    throw new SchemaError("hist needs a landscape CSV; missing column 'Fgrad'");
  }
  return { trials, landscape, title };
}

function binCounts(values: number[], lo: number, hi: number): number[] {
  const counts = new Array(HIST_BINS).fill(0);
  const w = (hi - lo) / HIST_BINS;
  for (const v of values) {
    if (v < lo || v > hi) continue;
    const i = Math.min(HIST_BINS - 1, Math.floor((v - lo) / w));
    counts[i] += 1;
  }
  return counts;
}

export function renderHist(inp: HistInputs): string {
  const [vi, fi, Fi] = requireColumns(inp.landscape, ["v", "f", "F"]);
  requireColumns(inp.landscape, ["Fgrad"]);
  const [, , finalI, tailI, , divI] = requireColumns(
    inp.trials, ["trial_id", "seed", "final_w", "tail_avg_w", "tail_avg_v", "diverged"]);

  const vRaw = column(inp.landscape, vi);
  const fRaw = column(inp.landscape, fi);
  const FRaw = column(inp.landscape, Fi);
  const v = numbers(vRaw);
  const f = numbers(fRaw);
  const F = numbers(FRaw);

  const alive = inp.trials.rows.filter((r) => r[divI] !== "true");
  const finalsRaw = alive.map((r) => r[finalI]);
  const tailsRaw = alive.map((r) => r[tailI]);
  const finals = numbers(finalsRaw);
  const tails = numbers(tailsRaw);

  const width = 800;
  const height = 520;
  const top: Panel = { left: 70, right: width - 20, top: 30, bottom: 270 };
  const bot: Panel = { left: 70, right: width - 20, top: 300, bottom: height - 45 };

  const xDom = extent(v);
  const x = linearScale(xDom, [top.left, top.right]);
  const yTop = linearScale(padded(extent([...f, ...F])), [top.bottom, top.top]);

  const svg = new Svg(width, height);
  svg.text(width / 2, 18, inp.title ?? "convergent points over the smoothed landscape",
    { ...LABEL, "font-size": "14", "text-anchor": "middle" });

  drawFrame(svg, top);
  xAxis(svg, top, x, "v");
  yAxis(svg, top, yTop, "objective");
  svg.open("g", { id: "curve-f", "data-x": vRaw.join(" "), "data-y": fRaw.join(" ") });
  svg.polyline(v.map((vv, i) => [x(vv), yTop(f[i])]), { stroke: "#2e8b57", "stroke-width": "1.5" });
  svg.close();
  svg.open("g", { id: "curve-F", "data-x": vRaw.join(" "), "data-y": FRaw.join(" ") });
  svg.polyline(v.map((vv, i) => [x(vv), yTop(F[i])]), { stroke: "#d62728", "stroke-width": "1.5" });
  svg.close();
  svg.text(top.right - 8, top.top + 14, "f", { ...LABEL, fill: "#2e8b57", "text-anchor": "end" });
  svg.text(top.right - 8, top.top + 28, "F (smoothed)", { ...LABEL, fill: "#d62728", "text-anchor": "end" });

  drawFrame(svg, bot);
  xAxis(svg, bot, linearScale(xDom, [bot.left, bot.right]), "w");
  if (finals.length > 0) {
    const fc = binCounts(finals, xDom[0], xDom[1]);
    const tc = binCounts(tails, xDom[0], xDom[1]);
    const yHist = linearScale([0, Math.max(...fc, ...tc, 1)], [bot.bottom, bot.top + 8]);
    const xb = linearScale(xDom, [bot.left, bot.right]);
    const binW = (xb(xDom[1]) - xb(xDom[0])) / HIST_BINS;
    svg.open("g", { id: "hist-final", fill: "#1f77b4", "fill-opacity": "0.55",
      "data-values": finalsRaw.join(" ") });
    fc.forEach((c, i) => {
      if (c === 0) return;
      const xl = bot.left + i * binW;
      svg.leaf("rect", { x: px(xl), y: px(yHist(c)), width: px(binW),
        height: px(bot.bottom - yHist(c)), "data-count": String(c) });
    });
    svg.close();
    svg.open("g", { id: "hist-tail", fill: "#ff7f0e", "fill-opacity": "0.55",
      "data-values": tailsRaw.join(" ") });
    tc.forEach((c, i) => {
      if (c === 0) return;
      const xl = bot.left + i * binW;
      svg.leaf("rect", { x: px(xl), y: px(yHist(c)), width: px(binW),
        height: px(bot.bottom - yHist(c)), "data-count": String(c) });
    });
    svg.close();
    svg.text(bot.right - 8, bot.top + 16, `final w (${finals.length} trials)`,
      { ...LABEL, fill: "#1f77b4", "text-anchor": "end" });
    svg.text(bot.right - 8, bot.top + 30, "tail average",
      { ...LABEL, fill: "#ff7f0e", "text-anchor": "end" });
  } else {
    svg.text((bot.left + bot.right) / 2, (bot.top + bot.bottom) / 2,
      "no trials", { ...LABEL, "text-anchor": "middle" });
  }
  return svg.render();
}
