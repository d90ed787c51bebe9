/** Render a figure specification to an SVG or PNG file. */

import { writeFileSync } from "node:fs";
import { buildFigure, FigureKind } from "./figures.js";
import { encodePng } from "./png.js";
import { rasterize } from "./raster.js";
import { sceneToSvg } from "./svg.js";

export interface PlotSpec {
  kind: FigureKind;
  input: string; // path of the metric CSV
  output: string;
  format: "svg" | "png";
}

export function renderToFile(spec: PlotSpec): void {
  const scene = buildFigure(spec.kind, spec.input);
  if (spec.format === "png") {
    writeFileSync(spec.output, encodePng(rasterize(scene)));
  } else {
    writeFileSync(spec.output, sceneToSvg(scene), "utf-8");
  }
}
