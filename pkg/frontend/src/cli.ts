#!/usr/bin/env node
/** lapdiff-plot: render metric CSVs to figures.
 *
 * Usage:
 *   lapdiff-plot <kind> --input <metrics-dir-or-csv> --out <file> [--format svg|png]
 *
 * Kinds: learning_curve (amsd.csv), cdf (cdf.csv), lmse_series (lmse.csv),
 * connectivity (connectivity.csv). When --input is a directory, the kind's
 * CSV is looked up inside it.
 */

import { statSync } from "node:fs";
import { join } from "node:path";
import { FIGURE_KINDS, INPUT_FILE, FigureKind } from "./figures.js";
import { renderToFile } from "./render.js";

function usage(message?: string): never {
  if (message) console.error(`error: ${message}`);
  console.error(
    `usage: lapdiff-plot <${FIGURE_KINDS.join("|")}> --input <dir-or-csv> --out <file> [--format svg|png]`,
  );
  process.exit(1);
}

export function resolveInput(kind: FigureKind, input: string): string {
  let isDir = false;
  try {
    isDir = statSync(input).isDirectory();
  } catch {
    usage(`input not found: ${input}`);
  }
  return isDir ? join(input, INPUT_FILE[kind]) : input;
}

export function main(argv: string[]): number {
  if (argv.length === 0) usage();
  const kind = argv[0] as FigureKind;
  if (!FIGURE_KINDS.includes(kind)) usage(`unknown figure kind '${argv[0]}'`);
  let input: string | undefined;
  let output: string | undefined;
  let format: "svg" | "png" = "svg";
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage(`missing value for ${flag}`);
    if (flag === "--input") input = value;
    else if (flag === "--out") output = value;
    else if (flag === "--format") {
      if (value !== "svg" && value !== "png") usage(`unknown format '${value}'`);
      format = value;
    } else usage(`unknown flag '${flag}'`);
  }
  if (!input) usage("--input is required");
  if (!output) usage("--out is required");
  renderToFile({ kind, input: resolveInput(kind, input), output, format });
  console.log(`wrote ${output}`);
  return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") || process.argv[1]?.endsWith("cli.ts");
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}
