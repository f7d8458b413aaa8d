/** Line/multi-line figures as standalone SVG documents. */

import { SchemaError } from "./csv.js";
import {
  LINE_FRAME,
  SERIES_COLORS,
  axes,
  escapeXml,
  fmt,
  linearScale,
  openSvg,
} from "./svg.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface Annotation {
  x: number;
  label: string;
}

export interface LineOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
  logY?: boolean;
  annotations?: Annotation[];
}

export function renderLineSvg(series: Series[], options: LineOptions): string {
  if (series.length === 0 || series.every((s) => s.x.length === 0)) {
    throw new SchemaError("no data to plot");
  }
  let values = series.flatMap((s) => s.y);
  if (options.logY) {
    if (values.some((v) => v <= 0)) {
      throw new SchemaError("log scale requires strictly positive data");
    }
    series = series.map((s) => ({ ...s, y: s.y.map(Math.log10) }));
    values = series.flatMap((s) => s.y);
  }
  const xsAll = series.flatMap((s) => s.x);
  const frame = LINE_FRAME;
  const xScale = linearScale(Math.min(...xsAll), Math.max(...xsAll),
                             frame.left, frame.width - frame.right);
  const yMin = Math.min(...values);
  const yMax = Math.max(...values);
  const pad = 0.05 * (yMax - yMin || Math.abs(yMax) || 1);
  const yScale = linearScale(yMin - pad, yMax + pad, frame.height - frame.bottom, frame.top);

  const yLabel = options.logY ? `log10 ${options.yLabel ?? ""}`.trim() : options.yLabel ?? "";
  const parts = openSvg(frame);
  parts.push(...axes(frame, xScale, yScale, options.xLabel ?? "", yLabel, options.title ?? ""));
  series.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    const points = s.x
      .map((xv, k) => `${xScale.toPx(xv).toFixed(2)},${yScale.toPx(s.y[k]).toFixed(2)}`)
      .join(" ");
    parts.push(`<polyline fill="none" stroke="${color}" stroke-width="1.5" points="${points}"/>`);
    const ly = frame.top + 18 + 18 * i;
    const lx = frame.width - frame.right + 14;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
      `stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 28}" y="${ly}" ${"font-family=\"Helvetica, Arial, sans-serif\""} ` +
      `font-size="12">${escapeXml(s.label)}</text>`);
  });
  for (const note of options.annotations ?? []) {
    const px = xScale.toPx(note.x);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${frame.top}" x2="${px.toFixed(2)}" ` +
      `y2="${frame.height - frame.bottom}" stroke="#555555" stroke-dasharray="5,4"/>`);
    parts.push(`<text x="${(px + 5).toFixed(2)}" y="${frame.top + 14}" ` +
      `${"font-family=\"Helvetica, Arial, sans-serif\""} font-size="12">` +
      `${escapeXml(note.label)} = ${fmt(note.x)}</text>`);
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
