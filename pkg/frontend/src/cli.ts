/**
 * Figure rendering CLI.
 *
 * Usage:
 *   plots --spec figure.json
 *   plots <kind> <input...> <output.svg>
 *
 * Input counts per kind:
 *   field-with-interface  solution.csv triangles.csv interface.csv
 *   loglog-oscillation    metrics.csv report.json
 *   bmo-vs-scale          metrics.csv
 *   convergence           convergence.csv
 */

import { readFileSync, writeFileSync } from "fs";
import { FigureKind, FigureSpec, render } from "./figures.js";

const INPUT_COUNTS: Record<FigureKind, number> = {
  "field-with-interface": 3,
  "loglog-oscillation": 2,
  "bmo-vs-scale": 1,
  convergence: 1,
};

export function parseArgs(argv: string[]): FigureSpec {
  if (argv[0] === "--spec") {
    if (argv.length !== 2) {
      throw new Error("--spec takes exactly one path");
    }
    const spec = JSON.parse(readFileSync(argv[1], "utf8")) as FigureSpec;
    if (!(spec.kind in INPUT_COUNTS)) {
      throw new Error(`unknown figure kind '${spec.kind}'`);
    }
    if (!Array.isArray(spec.inputs) || spec.inputs.length !== INPUT_COUNTS[spec.kind]) {
      throw new Error(
        `kind '${spec.kind}' needs ${INPUT_COUNTS[spec.kind]} input path(s)`,
      );
    }
    if (typeof spec.output !== "string" || spec.output.length === 0) {
      throw new Error("spec is missing an output path");
    }
    return spec;
  }
  const kind = argv[0] as FigureKind;
  if (!(kind in INPUT_COUNTS)) {
    throw new Error(`unknown figure kind '${argv[0]}'`);
  }
  const n = INPUT_COUNTS[kind];
  if (argv.length !== n + 2) {
    throw new Error(`kind '${kind}' expects ${n} input path(s) and one output path`);
  }
  return { kind, inputs: argv.slice(1, 1 + n), output: argv[argv.length - 1] };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    writeFileSync(spec.output, render(spec));
    return 0;
  } catch (err) {
    console.error(`plots: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
