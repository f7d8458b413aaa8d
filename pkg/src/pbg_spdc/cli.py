"""Command-line front end.

Every subcommand takes one JSON run-config as a positional argument,
resolves file references relative to the config's directory, executes
(optionally sweeping the signal emission angle over a worker pool), and
writes CSV/binary outputs with provenance metadata into the configured
output directory.  Exit codes: 0 success, 2 config error, 3 numerical
singularity, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .constants import angular_frequency, vacuum_wavelength_nm
from .errors import ConfigError, NumericalError
from .materials import load_materials
from .observables import (
    energy_spectrum,
    hom_scan,
    photon_flux,
    reference_jsa,
    relative_efficiency,
    time_domain_tpa,
)
from .output import write_csv, write_jsa_binary
from .propagation import TE, transmittance_reflectance
from .pump import PumpSpec
from .spdc import EmissionGeometry, FrequencyGrid, jsa, jsa_cw
from .structure import boundary_positions, load_stack, stack_hash

SUBCOMMANDS = (
    "transmission", "jsa", "spectrum", "time-map", "flux", "hom", "efficiency", "validate",
)


def _config_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


class RunContext:
    """Loaded configuration plus derived objects shared by subcommands."""

    def __init__(self, config_path: str):
        self.config_path = config_path
        self.doc = _load_config(config_path)
        self.base = os.path.dirname(os.path.abspath(config_path))
        self.config_hash = _config_hash(self.doc)
        for key in ("materials", "stack"):
            if key not in self.doc:
                raise ConfigError(f"{config_path}: missing {key!r} entry")
        self.registry = load_materials(self._resolve(self.doc["materials"]))
        self.stack = load_stack(self._resolve(self.doc["stack"]), self.registry)
        self.pump = self._build_pump()
        self.output_dir = self._resolve(self.doc.get("output_dir", "out"))

    def _resolve(self, relpath) -> str:
        path = os.fspath(relpath)
        return path if os.path.isabs(path) else os.path.join(self.base, path)

    def _build_pump(self) -> PumpSpec:
        block = self.doc.get("pump")
        if not isinstance(block, dict):
            raise ConfigError("config: missing pump block")
        kind = block.get("kind")
        wavelength = block.get("wavelength_nm")
        if kind not in ("cw", "gaussian") or not wavelength:
            raise ConfigError("config: pump needs kind (cw|gaussian) and wavelength_nm")
        common = dict(
            amplitude=float(block.get("amplitude", 1.0)),
            theta_p=np.radians(float(block.get("theta_p_deg", 0.0))),
            phi_p=np.radians(float(block.get("phi_p_deg", 0.0))),
        )
        if kind == "cw":
            return PumpSpec.cw(float(wavelength), **common)
        if "tau_fs" not in block:
            raise ConfigError("config: gaussian pump needs tau_fs")
        return PumpSpec.gaussian(
            float(wavelength), tau_fs=float(block["tau_fs"]),
            chirp=float(block.get("chirp", 0.0)), **common,
        )

    # -- geometry / grids ----------------------------------------------------

    def theta_values_deg(self) -> list[float]:
        block = self.doc.get("geometry", {})
        theta = block.get("theta_s_deg", 0.0)
        if isinstance(theta, dict):
            try:
                start, stop = float(theta["start"]), float(theta["stop"])
                steps = int(theta["steps"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"config: geometry.theta_s_deg sweep: {exc}") from None
            if steps < 0:
                raise ConfigError("config: sweep steps must be >= 0")
            if steps == 0:
                return []
            if steps == 1:
                return [start]
            return list(np.linspace(start, stop, steps))
        return [float(theta)]

    def geometry(self, theta_deg: float) -> EmissionGeometry:
        block = self.doc.get("geometry", {})
        return EmissionGeometry(
            theta_s=float(np.radians(theta_deg)),
            phi_s=float(np.radians(block.get("phi_s_deg", 0.0))),
            phi_i=float(np.radians(block.get("phi_i_deg", 0.0))),
        )

    def frequency_grid(self, force_odd: bool = False) -> FrequencyGrid:
        block = self.doc.get("grid", {})
        frac = float(block.get("omega_half_span_frac", 0.3))
        points = int(block.get("omega_points", 512))
        if not (0 < frac < 1) or points < 2:
            raise ConfigError("config: grid needs 0 < omega_half_span_frac < 1, points >= 2")
        if force_odd and points % 2 == 0:
            points += 1
        center = self.pump.omega0 / 2.0
        return FrequencyGrid(center * (1 - frac), center * (1 + frac), points)

    def time_axis(self, key: str, default=(-600.0, 600.0, 1201)) -> np.ndarray:
        block = self.doc.get(key, {})
        start = float(block.get("tau_start_fs", default[0]))
        stop = float(block.get("tau_stop_fs", default[1]))
        points = int(block.get("points", default[2]))
        if stop <= start or points < 2:
            raise ConfigError(f"config: {key} time axis needs stop > start and points >= 2")
        return np.linspace(start, stop, points)

    def meta(self, subcommand: str) -> dict:
        return {
            "tool": f"pbg-spdc {__version__}",
            "subcommand": subcommand,
            "stack_hash": stack_hash(self.stack),
            "config_hash": self.config_hash,
        }


# -- per-theta row builders (module-level: picklable for worker pools) --------

_CHANNEL_ORDER = ("FF", "FB", "BF", "BB")


def _rows_transmission(ctx: RunContext, theta_deg: float) -> list:
    block = ctx.doc.get("transmission", {})
    lam_start = float(block.get("lambda_start_nm", 1100.0))
    lam_stop = float(block.get("lambda_stop_nm", 1600.0))
    points = int(block.get("points", 1001))
    norm = block.get("normalization", "signal")
    if norm not in ("signal", "pump"):
        raise ConfigError("config: transmission.normalization must be signal or pump")
    if points < 2 or lam_stop <= lam_start:
        raise ConfigError("config: transmission wavelength window invalid")
    lam = np.linspace(lam_start, lam_stop, points)
    omega = angular_frequency(lam)
    factor = 2.0 if norm == "signal" else 1.0
    t_pow, r_pow = transmittance_reflectance(
        ctx.stack, omega, np.radians(theta_deg), TE, field=norm
    )
    return [
        [factor * w / ctx.pump.omega0, theta_deg, tv, rv]
        for w, tv, rv in zip(omega, t_pow, r_pow)
    ]


def _spectrum_for(ctx: RunContext, theta_deg: float):
    if ctx.pump.kind == "cw":
        grid = ctx.frequency_grid(force_odd=True)
        return jsa_cw(ctx.stack, ctx.pump, ctx.geometry(theta_deg), grid)
    return jsa(ctx.stack, ctx.pump, ctx.geometry(theta_deg), ctx.frequency_grid())


def _rows_spectrum(ctx: RunContext, theta_deg: float) -> list:
    grid_jsa = _spectrum_for(ctx, theta_deg)
    spec = energy_spectrum(grid_jsa)
    rows = []
    for idx, w in enumerate(spec.omega_s):
        row = [theta_deg, vacuum_wavelength_nm(w)]
        row += [spec.channels[ch][idx] for ch in _CHANNEL_ORDER]
        row += [spec.combined["sF"][idx], spec.combined["sB"][idx]]
        rows.append(row)
    return rows


def _rows_hom(ctx: RunContext, theta_deg: float) -> list:
    block = ctx.doc.get("hom", {})
    tau = ctx.time_axis("hom")
    window = float(block.get("dip_window_fraction", 0.5))
    scan = hom_scan(_spectrum_for(ctx, theta_deg), tau, window_fraction=window)
    rows = [
        [theta_deg, t] + [scan.rn[ch][i] for ch in _CHANNEL_ORDER]
        for i, t in enumerate(tau)
    ]
    rows.append([theta_deg, "dip_center_fs"] + [scan.dip_center[ch] for ch in _CHANNEL_ORDER])
    rows.append([theta_deg, "dip_fwhm_fs"] + [scan.dip_fwhm[ch] for ch in _CHANNEL_ORDER])
    rows.append([theta_deg, "visibility"] + [scan.visibility[ch] for ch in _CHANNEL_ORDER])
    return rows


def _rows_flux(ctx: RunContext, theta_deg: float) -> list:
    if ctx.pump.kind != "gaussian":
        raise ConfigError("flux requires a gaussian pump")
    block = ctx.doc.get("flux", {})
    method = block.get("method", "double-frequency")
    grid_jsa = jsa(ctx.stack, ctx.pump, ctx.geometry(theta_deg), ctx.frequency_grid())
    tau = ctx.time_axis("flux", default=(-400.0, 1000.0, 701))
    result = photon_flux(grid_jsa, tau, method=method)
    return [
        [theta_deg, t] + [result.channels[ch][i] for ch in _CHANNEL_ORDER]
        for i, t in enumerate(result.tau_s)
    ]


def _rows_efficiency(ctx: RunContext, theta_deg: float) -> list:
    block = ctx.doc.get("efficiency", {})
    weight = block.get("reference_weight", "as-written")
    target = float(block.get("omega_s_frac", 0.5)) * ctx.pump.omega0
    if ctx.pump.kind == "cw":
        grid = ctx.frequency_grid(force_odd=True)
        grid_jsa = jsa_cw(ctx.stack, ctx.pump, ctx.geometry(theta_deg), grid)
        ref = reference_jsa(ctx.stack, ctx.pump, grid, weight_mode=weight)
    else:
        row_grid = FrequencyGrid(target, target, 1)
        idler_grid = ctx.frequency_grid()
        grid_jsa = jsa(ctx.stack, ctx.pump, ctx.geometry(theta_deg), row_grid, idler_grid)
        ref = reference_jsa(ctx.stack, ctx.pump, row_grid, idler_grid, weight_mode=weight)
    report = relative_efficiency(grid_jsa, ref)
    at = report.at(target)
    return [[theta_deg] + [at[ch] for ch in _CHANNEL_ORDER] + [at["total"]]]


def _worker(payload):
    config_path, subcommand, theta_deg = payload
    ctx = RunContext(config_path)
    return _ROW_BUILDERS[subcommand](ctx, theta_deg)


_ROW_BUILDERS = {
    "transmission": _rows_transmission,
    "spectrum": _rows_spectrum,
    "hom": _rows_hom,
    "flux": _rows_flux,
    "efficiency": _rows_efficiency,
}


def _sweep(ctx: RunContext, subcommand: str, thetas: list[float], workers: int) -> list:
    if workers <= 1 or len(thetas) <= 1:
        blocks = [_ROW_BUILDERS[subcommand](ctx, theta) for theta in thetas]
    else:
        payloads = [(ctx.config_path, subcommand, theta) for theta in thetas]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_worker, payloads))
    return [row for block in blocks for row in block]


_SWEEP_COLUMNS = {
    "transmission": ["omega_norm", "theta_deg", "T", "R"],
    "spectrum": ["theta_deg", "lambda_nm", "S_FF", "S_FB", "S_BF", "S_BB", "S_sF", "S_sB"],
    "hom": ["theta_deg", "tau_fs", "Rn_FF", "Rn_FB", "Rn_BF", "Rn_BB"],
    "flux": ["theta_deg", "tau_fs", "flux_FF", "flux_FB", "flux_BF", "flux_BB"],
    "efficiency": ["theta_deg", "eta_FF", "eta_FB", "eta_BF", "eta_BB", "eta_total"],
}


def _run_sweep_subcommand(ctx: RunContext, subcommand: str, workers: int, no_meta: bool) -> int:
    rows = _sweep(ctx, subcommand, ctx.theta_values_deg(), workers)
    name = subcommand.replace("-", "_")
    path = os.path.join(ctx.output_dir, f"{name}.csv")
    write_csv(path, _SWEEP_COLUMNS[subcommand], rows,
              None if no_meta else ctx.meta(subcommand))
    print(path)
    return 0


def _run_jsa(ctx: RunContext, no_meta: bool) -> int:
    thetas = ctx.theta_values_deg()
    if len(thetas) != 1:
        raise ConfigError("jsa needs a single theta_s_deg (no sweep)")
    grid_jsa = jsa(ctx.stack, ctx.pump, ctx.geometry(thetas[0]), ctx.frequency_grid())
    binary_path = os.path.join(ctx.output_dir, "jsa.jsagrid")
    write_jsa_binary(binary_path, grid_jsa)
    rows = []
    for axis, x, other, axis_index in (
        ("signal", grid_jsa.omega_s, grid_jsa.omega_i, 1),
        ("idler", grid_jsa.omega_i, grid_jsa.omega_s, 0),
    ):
        marginals = {
            ch: np.trapezoid(np.abs(sheet) ** 2, other, axis=axis_index)
            for ch, sheet in grid_jsa.channels.items()
        }
        for idx, w in enumerate(x):
            rows.append(
                [axis, 2.0 * w / ctx.pump.omega0]
                + [marginals[ch][idx] for ch in _CHANNEL_ORDER]
            )
    csv_path = os.path.join(ctx.output_dir, "jsa_marginals.csv")
    write_csv(csv_path, ["axis", "omega_norm", "m_FF", "m_FB", "m_BF", "m_BB"], rows,
              None if no_meta else ctx.meta("jsa"))
    print(binary_path)
    print(csv_path)
    return 0


def _run_time_map(ctx: RunContext, no_meta: bool) -> int:
    thetas = ctx.theta_values_deg()
    if len(thetas) != 1:
        raise ConfigError("time-map needs a single theta_s_deg (no sweep)")
    block = ctx.doc.get("time_map", {})
    pad = float(block.get("pad_factor", 2.0))
    window = block.get("window_fs", None)
    stride = int(block.get("stride", 1))
    if stride < 1:
        raise ConfigError("config: time_map.stride must be >= 1")
    tpa = time_domain_tpa(_spectrum_for(ctx, thetas[0]), pad_factor=pad, window_fs=window)
    rows = []
    for j in range(0, tpa.tau_s.size, stride):
        for k in range(0, tpa.tau_i.size, stride):
            rows.append(
                [tpa.tau_s[j], tpa.tau_i[k]]
                + [float(np.abs(tpa.channels[ch][j, k]) ** 2) for ch in _CHANNEL_ORDER]
            )
    path = os.path.join(ctx.output_dir, "time_map.csv")
    write_csv(path, ["tau_s_fs", "tau_i_fs", "A2_FF", "A2_FB", "A2_BF", "A2_BB"], rows,
              None if no_meta else ctx.meta("time-map"))
    print(path)
    return 0


def _run_validate(ctx: RunContext) -> int:
    z = boundary_positions(ctx.stack)
    print(f"materials: {len(ctx.registry)}")
    print(f"layers: {ctx.stack.n_layers}")
    print(f"total_thickness_nm: {z[-1] - z[0]}")
    print(f"stack_hash: {stack_hash(ctx.stack)}")
    print(f"pump: {ctx.pump.kind} at {vacuum_wavelength_nm(ctx.pump.omega0):.6g} nm")
    print(f"theta_points: {len(ctx.theta_values_deg())}")
    print("ok")
    return 0


def _worker_count(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("PBG_SPDC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PBG_SPDC_WORKERS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbg-spdc",
        description="Photon-pair emission from 1-d nonlinear photonic-band-gap stacks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for sweeps (default: PBG_SPDC_WORKERS or CPU count)")
        p.add_argument("--no-meta", action="store_true",
                       help="omit the provenance comment header from CSV outputs")
    return parser


def main(argv=None) -> int:
    try:
        try:
            args = _build_parser().parse_args(argv)
        except SystemExit as exc:
            if exc.code not in (0, None):
                return 2
            return 0
        ctx = RunContext(args.config)
        workers = _worker_count(args)
        if args.subcommand == "validate":
            return _run_validate(ctx)
        if args.subcommand == "jsa":
            return _run_jsa(ctx, args.no_meta)
        if args.subcommand == "time-map":
            return _run_time_map(ctx, args.no_meta)
        return _run_sweep_subcommand(ctx, args.subcommand, workers, args.no_meta)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
