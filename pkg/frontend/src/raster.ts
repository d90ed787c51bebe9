/** Scene -> RGBA pixel buffer, for the PNG output path. */

import type { Scene, Shape, TextLabel } from "./scene.js";
import { GLYPH_H, GLYPH_W, glyphFor } from "./microfont.js";

export interface Raster {
  width: number;
  height: number;
  pixels: Uint8ClampedArray; // RGBA
}

function parseColor(color: string): [number, number, number] {
  const hex = color.startsWith("#") ? color.slice(1) : "000000";
  return [
    parseInt(hex.slice(0, 2), 16),
    parseInt(hex.slice(2, 4), 16),
    parseInt(hex.slice(4, 6), 16),
  ];
}

function put(raster: Raster, x: number, y: number, rgb: [number, number, number]): void {
  if (x < 0 || y < 0 || x >= raster.width || y >= raster.height) return;
  const i = (y * raster.width + x) * 4;
  raster.pixels[i] = rgb[0];
  raster.pixels[i + 1] = rgb[1];
  raster.pixels[i + 2] = rgb[2];
  raster.pixels[i + 3] = 255;
}

function fillRect(raster: Raster, x: number, y: number, w: number, h: number, rgb: [number, number, number]): void {
  for (let j = Math.max(0, Math.floor(y)); j < Math.min(raster.height, Math.ceil(y + h)); j++) {
    for (let i = Math.max(0, Math.floor(x)); i < Math.min(raster.width, Math.ceil(x + w)); i++) {
      put(raster, i, j, rgb);
    }
  }
}

/** Bresenham segment with a square pen of the given radius. */
function drawSegment(
  raster: Raster,
  x0: number, y0: number, x1: number, y1: number,
  rgb: [number, number, number], radius: number,
): void {
  let ix0 = Math.round(x0);
  let iy0 = Math.round(y0);
  const ix1 = Math.round(x1);
  const iy1 = Math.round(y1);
  const dx = Math.abs(ix1 - ix0);
  const dy = -Math.abs(iy1 - iy0);
  const sx = ix0 < ix1 ? 1 : -1;
  const sy = iy0 < iy1 ? 1 : -1;
  let err = dx + dy;
  for (;;) {
    for (let oy = -radius; oy <= radius; oy++) {
      for (let ox = -radius; ox <= radius; ox++) {
        put(raster, ix0 + ox, iy0 + oy, rgb);
      }
    }
    if (ix0 === ix1 && iy0 === iy1) break;
    const e2 = 2 * err;
    if (e2 >= dy) { err += dy; ix0 += sx; }
    if (e2 <= dx) { err += dx; iy0 += sy; }
  }
}

function drawText(raster: Raster, label: TextLabel): void {
  const rgb = parseColor(label.color);
  const scale = label.size >= 12 ? 2 : label.size >= 10 ? 2 : 1;
  const advance = (GLYPH_W + 1) * scale;
  const width = label.text.length * advance - scale;
  let x = Math.round(label.x);
  if (label.anchor === "middle") x -= Math.round(width / 2);
  else if (label.anchor === "end") x -= width;
  const y = Math.round(label.y) - GLYPH_H * scale + 1;
  for (const ch of label.text) {
    const glyph = glyphFor(ch);
    for (let row = 0; row < GLYPH_H; row++) {
      for (let col = 0; col < GLYPH_W; col++) {
        const bit = (glyph >> ((GLYPH_H - 1 - row) * GLYPH_W + (GLYPH_W - 1 - col))) & 1;
        if (bit) {
          fillRect(raster, x + col * scale, y + row * scale, scale, scale, rgb);
        }
      }
    }
    x += advance;
  }
}

function drawShape(raster: Raster, shape: Shape): void {
  switch (shape.kind) {
    case "rect":
      fillRect(raster, shape.x, shape.y, shape.w, shape.h, parseColor(shape.fill));
      break;
    case "polyline": {
      const rgb = parseColor(shape.color);
      const radius = shape.width > 2 ? 1 : 0;
      for (let i = 1; i < shape.points.length; i++) {
        const [x0, y0] = shape.points[i - 1];
        const [x1, y1] = shape.points[i];
        drawSegment(raster, x0, y0, x1, y1, rgb, radius);
      }
      break;
    }
    case "text":
      drawText(raster, shape);
      break;
  }
}

export function rasterize(scene: Scene): Raster {
  const raster: Raster = {
    width: scene.width,
    height: scene.height,
    pixels: new Uint8ClampedArray(scene.width * scene.height * 4),
  };
  for (const shape of scene.shapes) drawShape(raster, shape);
  return raster;
}
