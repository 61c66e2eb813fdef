import { execFileSync } from "child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

const GOLDEN = join(__dirname, "..", "testdata", "golden");
const CLI = join(__dirname, "..", "dist", "cli.js");

interface Result {
  status: number;
  stdout: string;
  stderr: string;
}

function plot(...args: string[]): Result {
  try {
    const stdout = execFileSync("node", [CLI, ...args], { encoding: "utf8" });
    return { status: 0, stdout, stderr: "" };
  } catch (err: any) {
    return { status: err.status ?? 1, stdout: err.stdout ?? "", stderr: err.stderr ?? "" };
  }
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

const HIST_ARGS = [
  "--csv", join(GOLDEN, "figC-sep-large-trials.csv"),
  "--csv", join(GOLDEN, "figC-sep-large-landscape.csv"),
];
const FAMILY_ARGS = ["0.1", "0.3", "0.5", "0.9"].flatMap((eta) => [
  "--csv", join(GOLDEN, `smooth-curves-eta${eta}.csv`),
]);

describe("golden presets", () => {
  it("hist renders nonempty and deterministically", () => {
    const dir = tmp();
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    expect(plot("hist", ...HIST_ARGS, "--out", a).status).toBe(0);
    expect(plot("hist", ...HIST_ARGS, "--out", b).status).toBe(0);
    const bytes = readFileSync(a);
    expect(bytes.length).toBeGreaterThan(1000);
    expect(bytes.equals(readFileSync(b))).toBe(true);
    const svg = bytes.toString();
    expect(svg).toContain('id="curve-f"');
    expect(svg).toContain('id="curve-F"');
    expect(svg).toContain('id="hist-final"');
    expect(svg).toContain('id="hist-tail"');
  });

  it("sweep renders nonempty and deterministically", () => {
    const dir = tmp();
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    expect(plot("sweep", "--csv", join(GOLDEN, "fig2-sweep.csv"), "--out", a).status).toBe(0);
    expect(plot("sweep", "--csv", join(GOLDEN, "fig2-sweep.csv"), "--out", b).status).toBe(0);
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
    const svg = readFileSync(a, "utf8");
    expect(svg).toMatch(/tail-averaged: slope -?\d+\.\d\d/);
    expect(svg).toMatch(/plain sgd: slope -?\d+\.\d\d/);
  });

  it("family renders every member with minimizer markers", () => {
    const dir = tmp();
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    expect(plot("family", ...FAMILY_ARGS, "--out", a).status).toBe(0);
    expect(plot("family", ...FAMILY_ARGS, "--out", b).status).toBe(0);
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
    const svg = readFileSync(a, "utf8");
    for (const eta of ["0.1", "0.3", "0.5", "0.9"]) {
      expect(svg).toContain(`eta=${eta}`);
    }
    expect((svg.match(/<circle /g) ?? []).length).toBe(4);
  });
});

describe("plotted values come from the CSV verbatim", () => {
  it("an edited landscape value shows up in the curve data", () => {
    const dir = tmp();
    const src = readFileSync(join(GOLDEN, "figC-sep-large-landscape.csv"), "utf8");
    const lines = src.split("\n");
    // replace the F field of the first data row with a sentinel
    const headerAt = lines.findIndex((l) => l.startsWith("v,"));
    const fields = lines[headerAt + 1].split(",");
    fields[2] = "123.456789";
    lines[headerAt + 1] = fields.join(",");
    const edited = join(dir, "landscape.csv");
    writeFileSync(edited, lines.join("\n"));
    const out = join(dir, "fig.svg");
    expect(plot("hist", "--csv", join(GOLDEN, "figC-sep-large-trials.csv"),
      "--csv", edited, "--out", out).status).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("123.456789");
  });

  it("an edited sweep value shows up in the series data", () => {
    const dir = tmp();
    const src = readFileSync(join(GOLDEN, "fig2-sweep.csv"), "utf8");
    const edited = join(dir, "sweep.csv");
    const lines = src.split("\n");
    const headerAt = lines.findIndex((l) => l.startsWith("eta,"));
    const fields = lines[headerAt + 1].split(",");
    fields[1] = "0.777888999";
    lines[headerAt + 1] = fields.join(",");
    writeFileSync(edited, lines.join("\n"));
    const out = join(dir, "fig.svg");
    expect(plot("sweep", "--csv", edited, "--out", out).status).toBe(0);
    expect(readFileSync(out, "utf8")).toContain('data-y="0.777888999"');
  });

  it("family markers sit at each CSV's own argmin row", () => {
    const dir = tmp();
    const out = join(dir, "fig.svg");
    expect(plot("family", ...FAMILY_ARGS, "--out", out).status).toBe(0);
    const svg = readFileSync(out, "utf8");
    for (const eta of ["0.1", "0.3", "0.5", "0.9"]) {
      const csv = readFileSync(join(GOLDEN, `smooth-curves-eta${eta}.csv`), "utf8");
      const rows = csv.split("\n").filter((l) => l && !l.startsWith("#")).slice(1)
        .map((l) => l.split(","));
      let best = 0;
      rows.forEach((r, i) => {
        if (Number(r[2]) < Number(rows[best][2])) best = i;
      });
      expect(svg).toContain(`data-v="${rows[best][0]}" data-F="${rows[best][2]}"`);
    }
  });
});

describe("degenerate and invalid inputs", () => {
  it("header-only trials file gives a curves-only figure", () => {
    const dir = tmp();
    const trials = join(dir, "trials.csv");
    writeFileSync(trials, "trial_id,seed,final_w,tail_avg_w,tail_avg_v,diverged\n");
    const out = join(dir, "fig.svg");
    const res = plot("hist", "--csv", trials,
      "--csv", join(GOLDEN, "figC-sep-large-landscape.csv"), "--out", out);
    expect(res.status).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain('id="curve-F"');
    expect(svg).not.toContain('id="hist-final"');
  });

  it("schema mismatch names the missing column", () => {
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "v,f,F\n0,1,1\n1,0,0\n");
    const res = plot("family", "--csv", bad, "--out", join(dir, "x.svg"));
    expect(res.status).toBe(1);
    expect(res.stderr).toContain("Fgrad");
    const res2 = plot("hist", "--csv", bad, "--csv", bad, "--out", join(dir, "y.svg"));
    expect(res2.status).toBe(1);
    expect(res2.stderr).toContain("trial_id");
  });

  it("rejects non-svg output and missing flags", () => {
    expect(plot("hist", ...HIST_ARGS, "--out", "x.png").status).toBe(1);
    expect(plot("hist", "--out", "x.svg").status).toBe(1);
    expect(plot("nonsense").status).toBe(1);
  });

  it("an eta=0 landscape plots the raw objective alone", () => {
    const dir = tmp();
    const path = join(dir, "flat.csv");
    writeFileSync(path, "# eta = 0\nv,f,F,Fgrad\n0.0,0.5,0.5,-1.0\n1.0,0.0,0.0,0.0\n2.0,0.5,0.5,1.0\n");
    const out = join(dir, "fig.svg");
    expect(plot("family", "--csv", path, "--out", out).status).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain('id="curve-f"');
    expect(svg).not.toContain('id="curve-F-');
  });
});

describe("synthetic slope fixtures", () => {
  function sweepCsv(dir: string, fn: (eta: number) => number): string {
    const etas = [0.05, 0.1, 0.2, 0.4, 0.8];
    const rows = etas.map((e) => `${e},${fn(e)},0.0,${fn(e)},0.0`).join("\n");
    const path = join(dir, "synthetic.csv");
    writeFileSync(path, `eta,mean_abs_tailavg,se,sqrt_time_avg_mse,se2\n${rows}\n`);
    return path;
  }

  it("y = eta annotates slope 1.00", () => {
    const dir = tmp();
    const out = join(dir, "fig.svg");
    expect(plot("sweep", "--csv", sweepCsv(dir, (e) => e), "--out", out).status).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("slope 1.00");
  });

  it("y = sqrt(eta) annotates slope 0.50", () => {
    const dir = tmp();
    const out = join(dir, "fig.svg");
    expect(plot("sweep", "--csv", sweepCsv(dir, Math.sqrt), "--out", out).status).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("slope 0.50");
  });
});
