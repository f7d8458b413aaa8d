/**
 * Reader for the binary joint-amplitude grid files (.jsagrid).
 *
 * Little-endian layout: 8-byte magic "JSAGRID\0", u32 version, u32 G_s,
 * u32 G_i, f64 omega_s0 / step, f64 omega_i0 / step, f64 omega_p0,
 * f64 theta_s, u32 channel count, u32 reserved, then the channel sheets
 * as row-major complex64.
 */

import { readFileSync } from "node:fs";

import { SchemaError } from "./csv.js";

const MAGIC = "JSAGRID\0";
const CHANNELS = ["FF", "FB", "BF", "BB"] as const;

export interface JsaGridFile {
  path: string;
  omegaS: Float64Array;
  omegaI: Float64Array;
  omegaP0: number;
  thetaS: number;
  /** Interleaved re/im complex64 per channel, row-major G_s x G_i. */
  channels: Map<string, Float32Array>;
}

export function readJsaGrid(path: string): JsaGridFile {
  const buf = readFileSync(path);
  if (buf.length < 8 || buf.toString("latin1", 0, 8) !== MAGIC) {
    throw new SchemaError(`${path}: not a joint-amplitude grid file`);
  }
  let off = 8;
  const u32 = () => {
    const v = buf.readUInt32LE(off);
    off += 4;
    return v;
  };
  const f64 = () => {
    const v = buf.readDoubleLE(off);
    off += 8;
    return v;
  };
  const version = u32();
  if (version !== 1) throw new SchemaError(`${path}: unsupported version ${version}`);
  const gs = u32();
  const gi = u32();
  const ws0 = f64();
  const dws = f64();
  const wi0 = f64();
  const dwi = f64();
  const omegaP0 = f64();
  const thetaS = f64();
  const nChannels = u32();
  u32(); // reserved
  const omegaS = Float64Array.from({ length: gs }, (_, j) => ws0 + j * dws);
  const omegaI = Float64Array.from({ length: gi }, (_, k) => wi0 + k * dwi);
  const channels = new Map<string, Float32Array>();
  const sheetBytes = gs * gi * 8;
  for (let c = 0; c < nChannels; c++) {
    const start = off + c * sheetBytes;
    if (start + sheetBytes > buf.length) {
      throw new SchemaError(`${path}: truncated channel data`);
    }
    const slice = buf.subarray(start, start + sheetBytes);
    // copy to an aligned buffer before viewing as Float32
    const aligned = new Uint8Array(sheetBytes);
    aligned.set(slice);
    channels.set(CHANNELS[c] ?? `CH${c}`, new Float32Array(aligned.buffer));
  }
  return { path, omegaS, omegaI, omegaP0, thetaS, channels };
}

/** |amplitude|^2 of one channel as a row-major matrix (G_s rows). */
export function magnitudeSquared(grid: JsaGridFile, channel: string): {
  values: Float64Array;
  rows: number;
  cols: number;
} {
  const sheet = grid.channels.get(channel);
  if (!sheet) {
    throw new SchemaError(
      `${grid.path}: missing channel ${JSON.stringify(channel)} ` +
        `(have: ${[...grid.channels.keys()].join(", ")})`,
    );
  }
  const rows = grid.omegaS.length;
  const cols = grid.omegaI.length;
  const values = new Float64Array(rows * cols);
  for (let i = 0; i < values.length; i++) {
    const re = sheet[2 * i];
    const im = sheet[2 * i + 1];
    values[i] = re * re + im * im;
  }
  return { values, rows, cols };
}
