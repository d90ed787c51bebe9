/** The four figure kinds, built from the simulator's CSV outputs. */

import { basename } from "node:path";
import { readCsv, numericColumn, stringColumn, SchemaError, Table } from "./csv.js";
import { buildScene, FrameSpec, Scene, SeriesSpec } from "./scene.js";

export type FigureKind = "learning_curve" | "cdf" | "lmse_series" | "connectivity";

export const FIGURE_KINDS: FigureKind[] = ["learning_curve", "cdf", "lmse_series", "connectivity"];

/** Which CSV each figure kind consumes (within a metrics directory). */
export const INPUT_FILE: Record<FigureKind, string> = {
  learning_curve: "amsd.csv",
  cdf: "cdf.csv",
  lmse_series: "lmse.csv",
  connectivity: "connectivity.csv",
};

function seriesColumns(table: Table, file: string, index: string): string[] {
  const names = table.header.filter((h) => h !== index);
  if (names.length === 0) throw new SchemaError(file, "no data columns besides the index");
  return names;
}

export function learningCurveFrame(path: string): FrameSpec {
  const table = readCsv(path);
  const file = basename(path);
  const k = numericColumn(table, file, "k");
  const series: SeriesSpec[] = seriesColumns(table, file, "k").map((name) => ({
    label: name,
    x: k,
    y: numericColumn(table, file, name),
  }));
  return {
    title: "AMSD learning curves",
    xLabel: "iteration",
    yLabel: "AMSD (normalized)",
    series,
    logY: true,
  };
}

export function cdfFrame(path: string): FrameSpec {
  const table = readCsv(path);
  const file = basename(path);
  const values = numericColumn(table, file, "value");
  const quantiles = numericColumn(table, file, "quantile");
  const algorithms = stringColumn(table, file, "algorithm");
  const byAlgo = new Map<string, { x: number[]; y: number[] }>();
  for (let i = 0; i < values.length; i++) {
    const entry = byAlgo.get(algorithms[i]) ?? { x: [], y: [] };
    entry.x.push(values[i]);
    entry.y.push(quantiles[i]);
    byAlgo.set(algorithms[i], entry);
  }
  const series: SeriesSpec[] = [...byAlgo.entries()].map(([label, data]) => ({
    label,
    x: data.x,
    y: data.y,
    step: true,
  }));
  return {
    title: "Empirical CDF of LMSE",
    xLabel: "LMSE (m^2)",
    yLabel: "probability",
    series,
    yMax: 1.0,
  };
}

export function lmseSeriesFrame(path: string): FrameSpec {
  const table = readCsv(path);
  const file = basename(path);
  const t = numericColumn(table, file, "t");
  const series: SeriesSpec[] = seriesColumns(table, file, "t").map((name) => ({
    label: name,
    x: t,
    y: numericColumn(table, file, name),
  }));
  return {
    title: "Localization mean square error",
    xLabel: "time step",
    yLabel: "LMSE (m^2)",
    series,
  };
}

export function connectivityFrame(path: string): FrameSpec {
  const table = readCsv(path);
  const file = basename(path);
  return {
    title: "Algebraic connectivity of the vehicle graph",
    xLabel: "time step",
    yLabel: "lambda2",
    series: [{ label: "lambda2", x: numericColumn(table, file, "t"), y: numericColumn(table, file, "lambda2") }],
  };
}

const BUILDERS: Record<FigureKind, (path: string) => FrameSpec> = {
  learning_curve: learningCurveFrame,
  cdf: cdfFrame,
  lmse_series: lmseSeriesFrame,
  connectivity: connectivityFrame,
};

export function buildFigure(kind: FigureKind, inputPath: string): Scene {
  const builder = BUILDERS[kind];
  if (!builder) throw new SchemaError(String(kind), "unknown figure kind");
  return buildScene(builder(inputPath));
}
