/**
 * Reading the harness CSV artifacts.
 *
 * Every artifact is RFC-4180 CSV preceded by `# key = value` comment lines
 * carrying the fully resolved run configuration. Fields are kept as raw
 * strings so rendered marks can echo them verbatim; numeric views are
 * derived on demand.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface Artifact {
  path: string;
  header: Record<string, string>;
  columns: string[];
  /** raw string fields, row-major, data rows only */
  rows: string[][];
}

export function readArtifact(path: string): Artifact {
  const text = readFileSync(path, "utf8");
  const header: Record<string, string> = {};
  const lines = text.split(/\r?\n/);
  let body = 0;
  while (body < lines.length && lines[body].startsWith("#")) {
    const stripped = lines[body].slice(1).trim();
    const eq = stripped.indexOf("=");
    if (eq > 0) {
      header[stripped.slice(0, eq).trim()] = stripped.slice(eq + 1).trim();
    }
    body += 1;
  }
  const parsed = Papa.parse<string[]>(lines.slice(body).join("\n").trim(), {
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const all = parsed.data;
  if (all.length === 0) {
    throw new SchemaError(`${path}: no header row`);
  }
  return { path, header, columns: all[0], rows: all.slice(1) };
}

/** Column indices in schema order; throws naming the first missing column. */
export function requireColumns(a: Artifact, names: string[]): number[] {
  return names.map((name) => {
    const i = a.columns.indexOf(name);
    if (i < 0) {
      throw new SchemaError(`${a.path}: missing column '${name}'`);
    }
    return i;
  });
}

export type ArtifactKind = "trials" | "landscape" | "sweep" | "summary" | "unknown";

export function classify(a: Artifact): ArtifactKind {
  const has = (c: string) => a.columns.includes(c);
  if (has("trial_id") && has("final_w")) return "trials";
  if (has("v") && has("F") && has("Fgrad")) return "landscape";
  if (has("eta") && has("mean_abs_tailavg") && has("sqrt_time_avg_mse")) return "sweep";
  if (has("preset") && has("vstar")) return "summary";
  return "unknown";
}

export function column(a: Artifact, index: number): string[] {
  return a.rows.map((r) => r[index]);
}

export function numbers(raw: string[]): number[] {
  return raw.map((s) => {
    const x = Number(s);
    if (!Number.isFinite(x)) {
      throw new SchemaError(`non-numeric field '${s}'`);
    }
    return x;
  });
}
