/** 3x5 pixel microfont for PNG label rendering.
 *
 * Each glyph is 15 bits, row-major top to bottom, most significant bit the
 * left column. Lowercase letters reuse the uppercase shapes; unknown
 * characters render as blanks.
 */

function rows(...r: [number, number, number, number, number]): number {
  return (r[0] << 12) | (r[1] << 9) | (r[2] << 6) | (r[3] << 3) | r[4];
}

export const GLYPH_W = 3;
export const GLYPH_H = 5;

export const GLYPHS: Record<string, number> = {
  " ": rows(0b000, 0b000, 0b000, 0b000, 0b000),
  "0": rows(0b111, 0b101, 0b101, 0b101, 0b111),
  "1": rows(0b010, 0b110, 0b010, 0b010, 0b111),
  "2": rows(0b111, 0b001, 0b111, 0b100, 0b111),
  "3": rows(0b111, 0b001, 0b111, 0b001, 0b111),
  "4": rows(0b101, 0b101, 0b111, 0b001, 0b001),
  "5": rows(0b111, 0b100, 0b111, 0b001, 0b111),
  "6": rows(0b111, 0b100, 0b111, 0b101, 0b111),
  "7": rows(0b111, 0b001, 0b010, 0b010, 0b010),
  "8": rows(0b111, 0b101, 0b111, 0b101, 0b111),
  "9": rows(0b111, 0b101, 0b111, 0b001, 0b111),
  ".": rows(0b000, 0b000, 0b000, 0b000, 0b010),
  ",": rows(0b000, 0b000, 0b000, 0b010, 0b100),
  "-": rows(0b000, 0b000, 0b111, 0b000, 0b000),
  "+": rows(0b000, 0b010, 0b111, 0b010, 0b000),
  "=": rows(0b000, 0b111, 0b000, 0b111, 0b000),
  "(": rows(0b010, 0b100, 0b100, 0b100, 0b010),
  ")": rows(0b010, 0b001, 0b001, 0b001, 0b010),
  "/": rows(0b001, 0b001, 0b010, 0b100, 0b100),
  "^": rows(0b010, 0b101, 0b000, 0b000, 0b000),
  "%": rows(0b101, 0b001, 0b010, 0b100, 0b101),
  "'": rows(0b010, 0b010, 0b000, 0b000, 0b000),
  ":": rows(0b000, 0b010, 0b000, 0b010, 0b000),
  "_": rows(0b000, 0b000, 0b000, 0b000, 0b111),
  A: rows(0b010, 0b101, 0b111, 0b101, 0b101),
  B: rows(0b110, 0b101, 0b110, 0b101, 0b110),
  C: rows(0b011, 0b100, 0b100, 0b100, 0b011),
  D: rows(0b110, 0b101, 0b101, 0b101, 0b110),
  E: rows(0b111, 0b100, 0b110, 0b100, 0b111),
  F: rows(0b111, 0b100, 0b110, 0b100, 0b100),
  G: rows(0b011, 0b100, 0b101, 0b101, 0b011),
  H: rows(0b101, 0b101, 0b111, 0b101, 0b101),
  I: rows(0b111, 0b010, 0b010, 0b010, 0b111),
  J: rows(0b001, 0b001, 0b001, 0b101, 0b010),
  K: rows(0b101, 0b110, 0b100, 0b110, 0b101),
  L: rows(0b100, 0b100, 0b100, 0b100, 0b111),
  M: rows(0b101, 0b111, 0b111, 0b101, 0b101),
  N: rows(0b101, 0b111, 0b111, 0b111, 0b101),
  O: rows(0b010, 0b101, 0b101, 0b101, 0b010),
  P: rows(0b110, 0b101, 0b110, 0b100, 0b100),
  Q: rows(0b010, 0b101, 0b101, 0b110, 0b011),
  R: rows(0b110, 0b101, 0b110, 0b110, 0b101),
  S: rows(0b011, 0b100, 0b010, 0b001, 0b110),
  T: rows(0b111, 0b010, 0b010, 0b010, 0b010),
  U: rows(0b101, 0b101, 0b101, 0b101, 0b111),
  V: rows(0b101, 0b101, 0b101, 0b101, 0b010),
  W: rows(0b101, 0b101, 0b111, 0b111, 0b101),
  X: rows(0b101, 0b101, 0b010, 0b101, 0b101),
  Y: rows(0b101, 0b101, 0b010, 0b010, 0b010),
  Z: rows(0b111, 0b001, 0b010, 0b100, 0b111),
};

export function glyphFor(ch: string): number {
  const direct = GLYPHS[ch];
  if (direct !== undefined) return direct;
  const upper = GLYPHS[ch.toUpperCase()];
  return upper ?? GLYPHS[" "];
}
