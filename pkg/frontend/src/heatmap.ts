/**
 * Heatmap rendering. The data matrix is rasterized one pixel block per
 * cell with no interpolation; the only resampling is the declared
 * `stride` decimation. Output is a PNG of the raw raster plus an SVG
 * figure embedding it with axes and a colorbar.
 */

import { PNG } from "pngjs";

import { SchemaError } from "./csv.js";
import { COLOR_TABLE, colorOf } from "./colormap.js";
import { FONT, escapeXml, fmt, linearScale } from "./svg.js";

export interface Matrix {
  /** row-major values, rows = y cells, cols = x cells */
  values: Float64Array;
  rows: number;
  cols: number;
  xAxis: number[];
  yAxis: number[];
}

export interface HeatmapOptions {
  logScale?: boolean;
  logFloor?: number;
  stride?: number;
  scalePx?: number;
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

export interface HeatmapPipeline {
  /** the exact matrix rendered (post-stride, raw values) */
  cells: Matrix;
  /** normalized [0, 1] values feeding the colormap */
  normalized: Float64Array;
  /** RGB raster, one pixel per cell before block scaling */
  rgb: Uint8Array;
  vmin: number;
  vmax: number;
}

export function decimate(matrix: Matrix, stride: number): Matrix {
  if (stride <= 1) return matrix;
  const rows = Math.ceil(matrix.rows / stride);
  const cols = Math.ceil(matrix.cols / stride);
  const values = new Float64Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      values[r * cols + c] = matrix.values[r * stride * matrix.cols + c * stride];
    }
  }
  return {
    values,
    rows,
    cols,
    xAxis: matrix.xAxis.filter((_, i) => i % stride === 0),
    yAxis: matrix.yAxis.filter((_, i) => i % stride === 0),
  };
}

export function heatmapPipeline(matrix: Matrix, options: HeatmapOptions): HeatmapPipeline {
  const cells = decimate(matrix, options.stride ?? 1);
  let mapped = Float64Array.from(cells.values);
  if (options.logScale) {
    if (options.logFloor !== undefined) {
      const floor = options.logFloor;
      if (!(floor > 0)) throw new SchemaError("log_floor must be > 0");
      mapped = mapped.map((v) => Math.max(v, floor));
    } else if (mapped.some((v) => v <= 0)) {
      throw new SchemaError(
        "log scale requires strictly positive data (set log_floor to clamp)",
      );
    }
    mapped = mapped.map(Math.log10);
  }
  let vmin = Infinity;
  let vmax = -Infinity;
  for (const v of mapped) {
    if (v < vmin) vmin = v;
    if (v > vmax) vmax = v;
  }
  const span = vmax > vmin ? vmax - vmin : 1.0;
  const normalized = mapped.map((v) => (v - vmin) / span);
  const rgb = new Uint8Array(cells.rows * cells.cols * 3);
  for (let i = 0; i < normalized.length; i++) {
    const [r, g, b] = colorOf(normalized[i]);
    rgb[3 * i] = r;
    rgb[3 * i + 1] = g;
    rgb[3 * i + 2] = b;
  }
  return { cells, normalized, rgb, vmin, vmax };
}

/** PNG of the raster; row 0 of the matrix lands at the bottom edge. */
export function rasterPng(pipeline: HeatmapPipeline, scalePx: number): Buffer {
  const { cells, rgb } = pipeline;
  const png = new PNG({ width: cells.cols * scalePx, height: cells.rows * scalePx });
  for (let r = 0; r < cells.rows; r++) {
    for (let c = 0; c < cells.cols; c++) {
      const src = 3 * (r * cells.cols + c);
      for (let dy = 0; dy < scalePx; dy++) {
        const py = (cells.rows - 1 - r) * scalePx + dy;
        for (let dx = 0; dx < scalePx; dx++) {
          const px = c * scalePx + dx;
          const dst = 4 * (py * png.width + px);
          png.data[dst] = rgb[src];
          png.data[dst + 1] = rgb[src + 1];
          png.data[dst + 2] = rgb[src + 2];
          png.data[dst + 3] = 255;
        }
      }
    }
  }
  return PNG.sync.write(png);
}

export function heatmapSvg(pipeline: HeatmapPipeline, png: Buffer,
                           options: HeatmapOptions): string {
  const { cells, vmin, vmax } = pipeline;
  const plotW = 560;
  const plotH = 560;
  const left = 86;
  const top = 46;
  const width = left + plotW + 150;
  const height = top + plotH + 72;
  const x = linearScale(cells.xAxis[0], cells.xAxis[cells.xAxis.length - 1], left, left + plotW);
  const y = linearScale(cells.yAxis[0], cells.yAxis[cells.yAxis.length - 1], top + plotH, top);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<image x="${left}" y="${top}" width="${plotW}" height="${plotH}" ` +
      `preserveAspectRatio="none" style="image-rendering:pixelated" ` +
      `href="data:image/png;base64,${png.toString("base64")}"/>`,
    `<rect x="${left}" y="${top}" width="${plotW}" height="${plotH}" fill="none" stroke="black"/>`,
  ];
  for (const t of x.ticks) {
    const px = x.toPx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${top + plotH}" x2="${px.toFixed(2)}" ` +
      `y2="${top + plotH + 5}" stroke="black"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${top + plotH + 20}" ${FONT} font-size="12" ` +
      `text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of y.ticks) {
    const py = y.toPx(t);
    parts.push(`<line x1="${left - 5}" y1="${py.toFixed(2)}" x2="${left}" y2="${py.toFixed(2)}" stroke="black"/>`);
    parts.push(`<text x="${left - 9}" y="${(py + 4).toFixed(2)}" ${FONT} font-size="12" ` +
      `text-anchor="end">${fmt(t)}</text>`);
  }
  // colorbar
  const barX = left + plotW + 28;
  const barW = 22;
  for (let i = 0; i < 256; i++) {
    const [r, g, b] = COLOR_TABLE[255 - i];
    const segH = plotH / 256;
    parts.push(`<rect x="${barX}" y="${(top + i * segH).toFixed(2)}" width="${barW}" ` +
      `height="${(segH + 0.6).toFixed(2)}" fill="rgb(${r},${g},${b})"/>`);
  }
  parts.push(`<rect x="${barX}" y="${top}" width="${barW}" height="${plotH}" fill="none" stroke="black"/>`);
  const barLabel = options.logScale ? "log10 value" : "value";
  parts.push(`<text x="${barX + barW + 8}" y="${top + 12}" ${FONT} font-size="12">${fmt(vmax)}</text>`);
  parts.push(`<text x="${barX + barW + 8}" y="${top + plotH}" ${FONT} font-size="12">${fmt(vmin)}</text>`);
  parts.push(`<text x="${barX + barW + 8}" y="${top + plotH / 2}" ${FONT} font-size="12">${escapeXml(barLabel)}</text>`);
  const midX = left + plotW / 2;
  parts.push(`<text x="${midX}" y="${top + plotH + 46}" ${FONT} font-size="14" ` +
    `text-anchor="middle">${escapeXml(options.xLabel ?? "")}</text>`);
  parts.push(`<text x="24" y="${top + plotH / 2}" ${FONT} font-size="14" text-anchor="middle" ` +
    `transform="rotate(-90 24 ${top + plotH / 2})">${escapeXml(options.yLabel ?? "")}</text>`);
  if (options.title) {
    parts.push(`<text x="${midX}" y="${top - 14}" ${FONT} font-size="15" ` +
      `text-anchor="middle">${escapeXml(options.title)}</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
