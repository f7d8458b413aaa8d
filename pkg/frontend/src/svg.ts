/**
 * Minimal deterministic SVG figure scaffolding: fixed canvas, margins,
 * linear axes with decimal ticks, and a fixed font stack. Everything is
 * assembled from plain strings; no timestamps or environment content.
 */

export const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-3) {
    return v.toExponential(3).replace(/\.?0+e/, "e");
  }
  return String(Number(v.toPrecision(6)));
}

export interface AxisScale {
  min: number;
  max: number;
  toPx: (v: number) => number;
  ticks: number[];
}

export function linearScale(min: number, max: number, pxLo: number, pxHi: number): AxisScale {
  if (!(max > min)) {
    max = min + 1;
  }
  const span = max - min;
  const rawStep = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return {
    min,
    max,
    ticks,
    toPx: (v) => pxLo + ((v - min) / span) * (pxHi - pxLo),
  };
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const LINE_FRAME: Frame = { width: 860, height: 520, left: 78, right: 180, top: 46, bottom: 62 };

export function openSvg(frame: Frame): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" ` +
      `viewBox="0 0 ${frame.width} ${frame.height}">`,
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>`,
  ];
}

export function axes(frame: Frame, x: AxisScale, y: AxisScale,
                     xLabel: string, yLabel: string, title: string): string[] {
  const parts: string[] = [];
  const { left, top } = frame;
  const right = frame.width - frame.right;
  const bottom = frame.height - frame.bottom;
  parts.push(`<rect x="${left}" y="${top}" width="${right - left}" height="${bottom - top}" ` +
    `fill="none" stroke="black" stroke-width="1"/>`);
  for (const t of x.ticks) {
    const px = x.toPx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${bottom}" x2="${px.toFixed(2)}" y2="${bottom + 5}" stroke="black"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${bottom + 20}" ${FONT} font-size="12" ` +
      `text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of y.ticks) {
    const py = y.toPx(t);
    parts.push(`<line x1="${left - 5}" y1="${py.toFixed(2)}" x2="${left}" y2="${py.toFixed(2)}" stroke="black"/>`);
    parts.push(`<text x="${left - 9}" y="${(py + 4).toFixed(2)}" ${FONT} font-size="12" ` +
      `text-anchor="end">${fmt(t)}</text>`);
  }
  const midX = (left + right) / 2;
  const midY = (top + bottom) / 2;
  parts.push(`<text x="${midX}" y="${frame.height - 16}" ${FONT} font-size="14" ` +
    `text-anchor="middle">${escapeXml(xLabel)}</text>`);
  parts.push(`<text x="20" y="${midY}" ${FONT} font-size="14" text-anchor="middle" ` +
    `transform="rotate(-90 20 ${midY})">${escapeXml(yLabel)}</text>`);
  if (title) {
    parts.push(`<text x="${midX}" y="${top - 14}" ${FONT} font-size="15" ` +
      `text-anchor="middle">${escapeXml(title)}</text>`);
  }
  return parts;
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
