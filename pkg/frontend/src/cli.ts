/**
 * plot hist|sweep|family --csv FILE [--csv FILE ...] --out FILE.svg [--title T]
 *
 * Inputs are smoothsgd CSV artifacts; the subcommand decides which schemas
 * are required (hist: one trials + one landscape, sweep: one sweep file,
 * family: one or more landscape files). Exit 0 on success, 1 on usage or
 * schema errors with the offending column named on stderr.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import { Artifact, classify, readArtifact, SchemaError } from "./csv.js";
import { renderFamily } from "./family.js";
import { pickHistInputs, renderHist } from "./hist.js";
import { renderSweep } from "./sweep.js";

interface Args {
  kind: string;
  csvs: string[];
  out: string;
  title?: string;
}

function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv;
  if (!kind || !["hist", "sweep", "family"].includes(kind)) {
    throw new SchemaError("usage: plot hist|sweep|family --csv FILE [--csv FILE ...] --out FILE");
  }
  const csvs: string[] = [];
  let out = "";
  let title: string | undefined;
  for (let i = 0; i < rest.length; i++) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (flag === "--csv" && value) {
      csvs.push(value);
      i++;
    } else if (flag === "--out" && value) {
      out = value;
      i++;
    } else if (flag === "--title" && value) {
      title = value;
      i++;
    } else {
      throw new SchemaError(`unknown or incomplete flag '${flag}'`);
    }
  }
  if (csvs.length === 0) throw new SchemaError("at least one --csv is required");
  if (!out) throw new SchemaError("--out FILE is required");
  if (!out.endsWith(".svg")) {
    throw new SchemaError("only .svg output is built in; raster formats are not supported");
  }
  return { kind, csvs, out, title };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const artifacts: Artifact[] = args.csvs.map(readArtifact);
    let svg: string;
    if (args.kind === "hist") {
      svg = renderHist(pickHistInputs(artifacts, args.title));
    } else if (args.kind === "sweep") {
      const sweep = artifacts.find((a) => classify(a) === "sweep");
      if (!sweep) throw new SchemaError("sweep needs a sweep CSV; missing column 'sqrt_time_avg_mse'");
      svg = renderSweep(sweep, args.title);
    } else {
      const lands = artifacts.filter((a) => classify(a) === "landscape");
      if (lands.length !== artifacts.length) {
        const bad = artifacts.find((a) => classify(a) !== "landscape");
        throw new SchemaError(`${bad!.path}: not a landscape CSV; missing column 'Fgrad'`);
      }
      svg = renderFamily(lands, args.title);
    }
    mkdirSync(dirname(args.out) || ".", { recursive: true });
    writeFileSync(args.out, svg);
    process.stdout.write(`${args.out}: ${svg.length} bytes\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || (err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`plot: error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

process.exitCode = run(process.argv.slice(2));
