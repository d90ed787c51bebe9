/** Scene -> SVG text. Output is a pure function of the scene (fixed number
 * formatting, no ids or timestamps), so identical inputs give identical
 * bytes. */

import type { Scene, Shape } from "./scene.js";

function fmt(value: number): string {
  // fixed two-decimal coordinates keep the output stable and compact
  return (Math.round(value * 100) / 100).toString();
}

function render(shape: Shape): string {
  switch (shape.kind) {
    case "rect":
      return `<rect x="${fmt(shape.x)}" y="${fmt(shape.y)}" width="${fmt(shape.w)}" height="${fmt(shape.h)}" fill="${shape.fill}"/>`;
    case "polyline": {
      const points = shape.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      return `<polyline points="${points}" fill="none" stroke="${shape.color}" stroke-width="${fmt(shape.width)}"/>`;
    }
    case "text": {
      const anchor = shape.anchor === "start" ? "" : ` text-anchor="${shape.anchor}"`;
      const text = shape.text
        .replaceAll("&", "&amp;")
        .replaceAll("<", "&lt;")
        .replaceAll(">", "&gt;");
      return `<text x="${fmt(shape.x)}" y="${fmt(shape.y)}" font-family="sans-serif" font-size="${fmt(shape.size)}" fill="${shape.color}"${anchor}>${text}</text>`;
    }
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.shapes.map(render).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n` +
    body +
    "\n</svg>\n"
  );
}
