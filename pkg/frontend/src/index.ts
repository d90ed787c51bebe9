export { SchemaError, readCsv, parseCsv, numericColumn, stringColumn } from "./csv.js";
export {
  buildScene,
  linearScale,
  log10Scale,
  niceTicks,
  formatTick,
  PALETTE,
} from "./scene.js";
export type { FrameSpec, SeriesSpec, Scene, Shape } from "./scene.js";
export { sceneToSvg } from "./svg.js";
export { rasterize } from "./raster.js";
export { encodePng } from "./png.js";
export {
  FIGURE_KINDS,
  INPUT_FILE,
  buildFigure,
  learningCurveFrame,
  cdfFrame,
  lmseSeriesFrame,
  connectivityFrame,
} from "./figures.js";
export type { FigureKind } from "./figures.js";
export { renderToFile, type PlotSpec } from "./render.js";
