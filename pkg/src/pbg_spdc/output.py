"""Deterministic CSV and binary emitters.

CSV files carry `# key: value` comment headers (tool version, stack and
config hashes) and shortest-round-trip float formatting, so identical
inputs produce byte-identical outputs.  All writes go to a temporary
file in the target directory followed by an atomic rename.

Binary joint-amplitude grids use a little-endian layout:

    magic   8 bytes  b"JSAGRID\\0"
    u32     version (1)
    u32     G_s, u32 G_i
    f64     omega_s[0], d_omega_s, omega_i[0], d_omega_i   [rad/fs]
    f64     omega_p0 [rad/fs], f64 theta_s [rad]
    u32     channel count (4: FF, FB, BF, BB), u32 reserved (0)
    then channel-count sheets, row-major complex64, G_s x G_i each.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import ConfigError
from .spdc import CHANNELS, JsaGrid

MAGIC = b"JSAGRID\x00"
VERSION = 1


def format_float(x) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def _atomic_write(path, payload: bytes):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows, meta: dict | None = None):
    """Write rows of floats/strings under a header line, atomically."""
    lines = []
    if meta:
        for key, value in meta.items():
            lines.append(f"# {key}: {value}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(
            cell if isinstance(cell, str) else format_float(cell) for cell in row
        ))
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def write_jsa_binary(path, grid: JsaGrid):
    omega_s, omega_i = grid.omega_s, grid.omega_i
    ds = float(omega_s[1] - omega_s[0]) if omega_s.size > 1 else 0.0
    di = float(omega_i[1] - omega_i[0]) if omega_i.size > 1 else 0.0
    header = MAGIC + struct.pack(
        "<IIIddddddII",
        VERSION,
        omega_s.size,
        omega_i.size,
        float(omega_s[0]),
        ds,
        float(omega_i[0]),
        di,
        float(grid.pump.omega0),
        float(grid.geometry.theta_s),
        len(CHANNELS),
        0,
    )
    body = b"".join(
        np.ascontiguousarray(grid.channels[ch], dtype=np.complex64).tobytes()
        for ch in CHANNELS
    )
    _atomic_write(path, header + body)


def read_jsa_binary(path):
    """Parse a binary grid; returns (omega_s, omega_i, {channel: sheet})."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ConfigError(f"{path}: not a joint-amplitude grid file")
    fixed = struct.calcsize("<IIIddddddII")
    fields = struct.unpack("<IIIddddddII", blob[len(MAGIC) : len(MAGIC) + fixed])
    version, gs, gi, ws0, ds, wi0, di, omega_p0, theta_s, nchan, _ = fields
    if version != VERSION:
        raise ConfigError(f"{path}: unsupported version {version}")
    omega_s = ws0 + ds * np.arange(gs)
    omega_i = wi0 + di * np.arange(gi)
    offset = len(MAGIC) + fixed
    sheet_bytes = gs * gi * 8
    channels = {}
    for idx in range(nchan):
        raw = blob[offset + idx * sheet_bytes : offset + (idx + 1) * sheet_bytes]
        if len(raw) != sheet_bytes:
            raise ConfigError(f"{path}: truncated channel data")
        channels[CHANNELS[idx]] = np.frombuffer(raw, dtype=np.complex64).reshape(gs, gi)
    return omega_s, omega_i, channels, {"omega_p0": omega_p0, "theta_s": theta_s}
