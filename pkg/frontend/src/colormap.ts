/**
 * Fixed 256-entry sequential colormap (viridis-style anchors, linear
 * interpolation). All entries are distinct, so a rendered pixel maps back
 * to exactly one level — the round-trip tests rely on that.
 */

export type Rgb = [number, number, number];

const ANCHORS: Rgb[] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

function buildTable(): Rgb[] {
  const table: Rgb[] = [];
  const seen = new Set<number>();
  const segments = ANCHORS.length - 1;
  for (let level = 0; level < 256; level++) {
    const t = (level / 255) * segments;
    const seg = Math.min(Math.floor(t), segments - 1);
    const frac = t - seg;
    const a = ANCHORS[seg];
    const b = ANCHORS[seg + 1];
    const r = Math.round(a[0] + frac * (b[0] - a[0]));
    const g = Math.round(a[1] + frac * (b[1] - a[1]));
    let blue = Math.round(a[2] + frac * (b[2] - a[2]));
    // interpolation can round neighbours onto the same triple; nudge the
    // blue channel until unique so pixel -> level inversion is exact
    while (seen.has((r << 16) | (g << 8) | blue)) {
      blue = (blue + 1) & 255;
    }
    seen.add((r << 16) | (g << 8) | blue);
    table.push([r, g, blue]);
  }
  return table;
}

export const COLOR_TABLE: readonly Rgb[] = buildTable();

const INVERSE = new Map<number, number>(
  COLOR_TABLE.map((rgb, level) => [(rgb[0] << 16) | (rgb[1] << 8) | rgb[2], level]),
);

/** Quantized level 0..255 for a normalized value in [0, 1]. */
export function levelOf(normalized: number): number {
  const clamped = Math.min(1, Math.max(0, normalized));
  return Math.round(clamped * 255);
}

export function colorOf(normalized: number): Rgb {
  return COLOR_TABLE[levelOf(normalized)];
}

/** Exact inverse of colorOf on table entries; undefined for foreign colors. */
export function levelFromColor(r: number, g: number, b: number): number | undefined {
  return INVERSE.get((r << 16) | (g << 8) | b);
}
