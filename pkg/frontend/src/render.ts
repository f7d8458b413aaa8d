/**
 * Figure dispatch: map one recipe entry onto the matching input parser
 * and renderer, and write the output file(s).
 *
 * Heatmaps accept either a binary joint-amplitude grid (channel selects
 * the |amplitude|^2 sheet) or a long-format CSV map (tau_s_fs, tau_i_fs,
 * value columns). Line figures accept any of the CSV schemas; for HOM
 * traces the dip-statistics footer can annotate the dip position.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import {
  CsvTable,
  SchemaError,
  columnIndex,
  numbersFrom,
  readCsv,
  splitHomBlocks,
} from "./csv.js";
import { magnitudeSquared, readJsaGrid } from "./grid.js";
import { HeatmapPipeline, Matrix, heatmapPipeline, heatmapSvg, rasterPng } from "./heatmap.js";
import { Annotation, Series, renderLineSvg } from "./line.js";
import { Figure } from "./recipe.js";

export interface RenderResult {
  outputs: string[];
  pipeline?: HeatmapPipeline;
}

function matrixFromGrid(path: string, channel: string): Matrix {
  const grid = readJsaGrid(path);
  const { values, rows, cols } = magnitudeSquared(grid, channel);
  // x axis: idler frequency (columns), y axis: signal frequency (rows),
  // both normalized to the degenerate frequency
  const scale = grid.omegaP0 / 2 || 1;
  return {
    values,
    rows,
    cols,
    xAxis: [...grid.omegaI].map((w) => w / scale),
    yAxis: [...grid.omegaS].map((w) => w / scale),
  };
}

function matrixFromMapCsv(table: CsvTable, valueColumn: string): Matrix {
  const xIdx = columnIndex(table, "tau_i_fs");
  const yIdx = columnIndex(table, "tau_s_fs");
  const vIdx = columnIndex(table, valueColumn);
  const xs = [...new Set(table.rows.map((r) => Number(r[xIdx])))].sort((a, b) => a - b);
  const ys = [...new Set(table.rows.map((r) => Number(r[yIdx])))].sort((a, b) => a - b);
  const xPos = new Map(xs.map((v, i) => [v, i]));
  const yPos = new Map(ys.map((v, i) => [v, i]));
  const values = new Float64Array(xs.length * ys.length).fill(NaN);
  for (const row of table.rows) {
    const xi = xPos.get(Number(row[xIdx]))!;
    const yi = yPos.get(Number(row[yIdx]))!;
    values[yi * xs.length + xi] = Number(row[vIdx]);
  }
  if ([...values].some((v) => Number.isNaN(v))) {
    throw new SchemaError(`${table.path}: map is not a complete rectangular grid`);
  }
  return { values, rows: ys.length, cols: xs.length, xAxis: xs, yAxis: ys };
}

function renderHeatmap(figure: Figure, inputPath: string, outputPath: string): RenderResult {
  let matrix: Matrix;
  if (inputPath.endsWith(".jsagrid")) {
    matrix = matrixFromGrid(inputPath, figure.channel ?? "FF");
  } else {
    const table = readCsv(inputPath);
    matrix = matrixFromMapCsv(table, figure.value_column ?? "A2_FF");
  }
  const pipeline = heatmapPipeline(matrix, {
    logScale: figure.log_scale,
    logFloor: figure.log_floor,
    stride: figure.stride,
  });
  const png = rasterPng(pipeline, figure.scale_px ?? 2);
  const svg = heatmapSvg(pipeline, png, {
    title: figure.title,
    xLabel: figure.x_label,
    yLabel: figure.y_label,
    logScale: figure.log_scale,
  });
  const pngPath = outputPath.endsWith(".png") ? outputPath : `${outputPath}.png`;
  const svgPath = pngPath.replace(/\.png$/, ".svg");
  writeFileSync(pngPath, png);
  writeFileSync(svgPath, svg);
  return { outputs: [pngPath, svgPath], pipeline };
}

function seriesFromTable(table: CsvTable, figure: Figure): {
  series: Series[];
  annotations: Annotation[];
} {
  const yNames = figure.y === undefined
    ? undefined
    : Array.isArray(figure.y) ? figure.y : [figure.y];
  const annotations: Annotation[] = [];

  if (table.columns.includes("tau_fs") && table.columns.includes("Rn_FF")) {
    // HOM trace with stats footer
    const blocks = splitHomBlocks(table);
    const block = figure.theta === undefined
      ? blocks[0]
      : blocks.find((b) => Math.abs(b.theta - figure.theta!) < 1e-9);
    if (!block) throw new SchemaError(`${table.path}: no block at theta=${figure.theta}`);
    const tauIdx = columnIndex(table, "tau_fs");
    const names = yNames ?? ["Rn_FF"];
    const series = names.map((name) => ({
      label: name,
      x: numbersFrom(block.rows, tauIdx),
      y: numbersFrom(block.rows, columnIndex(table, name)),
    }));
    if (figure.annotate_dip) {
      const stats = block.stats["dip_center_fs"];
      if (!stats) throw new SchemaError(`${table.path}: no dip_center_fs footer row`);
      const channelOrder = ["Rn_FF", "Rn_FB", "Rn_BF", "Rn_BB"];
      const idx = Math.max(0, channelOrder.indexOf(names[0]));
      annotations.push({ x: stats[idx], label: "dip center" });
    }
    return { series, annotations };
  }

  const xName = figure.x ?? (table.columns.includes("lambda_nm") ? "lambda_nm"
    : table.columns.includes("tau_fs") ? "tau_fs"
    : table.columns.includes("omega_norm") ? "omega_norm"
    : table.columns.includes("theta_deg") ? "theta_deg" : table.columns[0]);
  const xIdx = columnIndex(table, xName);
  let rows = table.rows.filter((r) => Number.isFinite(Number(r[xIdx])));
  if (figure.theta !== undefined && table.columns.includes("theta_deg")) {
    const tIdx = columnIndex(table, "theta_deg");
    rows = rows.filter((r) => Math.abs(Number(r[tIdx]) - figure.theta!) < 1e-9);
  }
  if (rows.length === 0) throw new SchemaError(`${table.path}: no data rows selected`);
  const names = yNames ?? table.columns.filter((c, i) => i !== xIdx && c !== "theta_deg").slice(0, 4);
  const series = names.map((name) => ({
    label: name,
    x: numbersFrom(rows, xIdx),
    y: numbersFrom(rows, columnIndex(table, name)),
  }));
  return { series, annotations };
}

function renderLine(figure: Figure, inputPath: string, outputPath: string): RenderResult {
  const table = readCsv(inputPath);
  const { series, annotations } = seriesFromTable(table, figure);
  const svg = renderLineSvg(series, {
    title: figure.title,
    xLabel: figure.x_label ?? figure.x,
    yLabel: figure.y_label,
    logY: figure.log_y,
    annotations,
  });
  const svgPath = outputPath.endsWith(".svg") ? outputPath : `${outputPath}.svg`;
  writeFileSync(svgPath, svg);
  return { outputs: [svgPath] };
}

export function renderFigure(figure: Figure, baseDir: string): RenderResult {
  const inputPath = resolve(baseDir, figure.input);
  const outputPath = resolve(baseDir, figure.output);
  mkdirSync(dirname(outputPath), { recursive: true });
  if (figure.kind === "heatmap") {
    return renderHeatmap(figure, inputPath, outputPath);
  }
  return renderLine(figure, inputPath, outputPath);
}
