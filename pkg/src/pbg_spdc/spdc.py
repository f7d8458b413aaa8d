"""Joint spectral amplitude of emitted photon pairs.

For each frequency pair (w_s, w_i) the emission amplitude into the four
exit channels FF/FB/BF/BB is a sum over nonlinear layers, internal
propagation directions of pump/signal/idler, and polarisations:

    phi ~ -i sqrt(w_s w_i) / (2 sqrt(2 pi) c)
          * sum_l  (d^(l) : e_p e_s e_i) A^(l) L_l e^{i dK L_l / 2}
            sinc(dK L_l / 2) * conj(Ds) * conj(Di),

with dK the signed z-wave-vector mismatch K_p - K_s - K_i in layer l
(K = +k_z forward, -k_z backward), A^(l) the internal pump amplitude at
the layer's left edge, and Ds/Di the exit-channel coefficients of the
layer's signal/idler waves.  Exit weights enter complex-conjugated
because the emitted photons carry creation operators.  Analyzer
projection rotates the TE/TM exit amplitudes onto the analyzer axes
with weights (cos phi, -sin phi).

The idler emission angle follows from transverse wave-vector matching
in the ambient region; where its sine magnitude exceeds one there is no
propagating idler exit channel and the grid point contributes zero.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .constants import C_NM_FS
from .errors import ConfigError, PumpModelError
from .propagation import (
    SINGULAR_CUTOFF,
    TE,
    TM,
    StackSolution,
    exit_decompositions,
    internal_field_map,
    snell_chain,
    solve_stack,
)
from .pump import PumpSpec, pump_polarization_split, pump_spectrum
from .structure import Stack, stack_hash

CHANNELS = ("FF", "FB", "BF", "BB")

#: grid points per flattened solver batch; bounds transient matrix memory.
_CHUNK_TARGET = 16384

_FWD, _BWD = 0, 1
_DIR_SIGN = {_FWD: 1.0, _BWD: -1.0}
_POL_COMPONENTS = {TE: (0,), TM: (1, 2)}


@dataclass(frozen=True)
class EmissionGeometry:
    theta_s: float           # signal emission angle in the ambient, rad
    phi_s: float = 0.0       # signal analyzer angle from the TE axis, rad
    phi_i: float = 0.0       # idler analyzer angle, rad

    def __post_init__(self):
        if not abs(self.theta_s) < np.pi / 2:
            raise ConfigError("|theta_s| must be below pi/2")


@dataclass(frozen=True)
class FrequencyGrid:
    start: float             # rad/fs
    stop: float
    points: int

    def __post_init__(self):
        if self.start <= 0 or self.stop < self.start:
            raise ConfigError("frequency grid needs 0 < start <= stop")
        if self.points < 1 or (self.points == 1 and self.stop != self.start):
            raise ConfigError("frequency grid needs points >= 1 (== 1 only if start == stop)")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    @property
    def step(self) -> float:
        return 0.0 if self.points == 1 else (self.stop - self.start) / (self.points - 1)


def degenerate_grid(pump: PumpSpec, half_span_frac: float = 0.3, points: int = 512) -> FrequencyGrid:
    """Uniform grid centered on the degenerate frequency w_p0 / 2."""
    center = pump.omega0 / 2.0
    return FrequencyGrid(center * (1 - half_span_frac), center * (1 + half_span_frac), points)


@dataclass(eq=False)
class JsaGrid:
    """Complex joint spectral amplitude on a 2-d grid, one sheet per channel."""

    omega_s: np.ndarray
    omega_i: np.ndarray
    channels: dict[str, np.ndarray]
    pump: PumpSpec
    geometry: EmissionGeometry
    metadata: dict = field(default_factory=dict)

    def validate(self, edge_decay: float = 1e-6):
        """Check finiteness and pump-band containment.

        The joint amplitude concentrates along the pump ridge
        w_s + w_i ~ w_p0; a grid wide enough to contain the pump
        bandwidth has decayed amplitudes at the anti-diagonal extremes
        (the corners of smallest and largest frequency sum).
        """
        peak = max(np.abs(sheet).max() for sheet in self.channels.values())
        for name, sheet in self.channels.items():
            if not np.all(np.isfinite(sheet)):
                raise ValueError(f"channel {name}: non-finite amplitude")
        if peak > 0 and self.omega_s.size > 2 and self.omega_i.size > 2:
            corners = max(
                max(abs(s[0, 0]), abs(s[-1, -1])) for s in self.channels.values()
            )
            if corners > edge_decay * peak:
                raise ValueError(
                    "grid too narrow: amplitude at the anti-diagonal corners "
                    f"exceeds {edge_decay:g} of the peak"
                )


@dataclass(eq=False)
class CwJsa:
    """Reduced 1-d joint amplitude for cw pumping, w_i := w_p0 - w_s implied.

    Squared-modulus quantities derived from it are per unit time: the
    formal squared delta line collapses to the constant CW_RATE_NORM.
    """

    omega_s: np.ndarray
    omega_p0: float
    channels: dict[str, np.ndarray]
    pump: PumpSpec
    geometry: EmissionGeometry
    normalization: str = "per-second"
    metadata: dict = field(default_factory=dict)

    @property
    def omega_i(self) -> np.ndarray:
        return self.omega_p0 - self.omega_s


def idler_angle(omega_p, omega_s, omega_i, theta_p_region, theta_s_region):
    """Idler angle from transverse wave-vector matching, or None if forbidden.

    arcsin[(w_p/w_i) sin(theta_p) - (w_s/w_i) sin(theta_s)]; None signals an
    evanescent (non-propagating) idler rather than an error.
    """
    if omega_i <= 0:
        raise ValueError("omega_i must be > 0")
    arg = (omega_p / omega_i) * np.sin(theta_p_region) - (omega_s / omega_i) * np.sin(
        theta_s_region
    )
    if abs(arg) > 1.0:
        return None
    return float(np.arcsin(arg))


def _idler_sines(omega_p, omega_s, omega_i, sin_p, sin_s):
    """Vectorised ambient idler sine with a propagating-validity mask.

    Points within 1e-12 of exact grazing are treated as forbidden so that
    a grid node landing on |sin| == 1 cannot poison a whole batch with a
    degenerate-angle failure.
    """
    arg = (omega_p * sin_p - omega_s * sin_s) / omega_i
    valid = np.abs(arg) <= 1.0 - 1e-12
    return np.where(valid, arg, 0.0), valid


def _pol_vector(pol: str, direction: int, cos, sin) -> np.ndarray:
    """Unit polarization vector components, shape (3,) + cos.shape."""
    shape = (3,) + np.shape(cos)
    e = np.zeros(shape, dtype=complex)
    if pol == TE:
        e[0] = 1.0
    else:
        e[1] = cos
        e[2] = -sin if direction == _FWD else sin
    return e


def _analyzer_weights(phi: float) -> dict[str, float]:
    # TE/TM exit operators projected onto the analyzer-passing mode.
    return {TE: float(np.cos(phi)), TM: float(-np.sin(phi))}


def _coupled_pols(d: np.ndarray, axis: int, weights: dict[str, float]) -> list[str]:
    """Polarisations with nonzero analyzer/pump weight and tensor coupling."""
    out = []
    for pol, comps in _POL_COMPONENTS.items():
        if weights.get(pol, 0.0) == 0.0:
            continue
        if np.any(np.take(d, comps, axis=axis + 1) != 0.0):
            out.append(pol)
    return out


def _guarded_exit(sol: StackSolution):
    """Exit decomposition with singular points masked instead of raised."""
    s = sol.smatrix
    s11 = s[..., 0, 0]
    bad = np.abs(s11) < SINGULAR_CUTOFF
    s11 = np.where(bad, 1.0, s11)
    m = np.zeros(s.shape, dtype=complex)
    m[..., 0, 0] = 1.0 / s11
    m[..., 0, 1] = -s[..., 0, 1] / s11
    m[..., 1, 1] = 1.0
    return sol.chain @ m, bad


class PumpFieldCache:
    """Unit-drive pump field maps memoised per quantised frequency.

    Values are immutable arrays; reads are lock-free, insertion is
    serialised, so concurrent readers with a single writer are safe.
    """

    def __init__(self, stack: Stack, theta_p: float, quantum: float = 1e-9):
        self._stack = stack
        self._theta_p = theta_p
        self._quantum = quantum
        self._lock = threading.Lock()
        self._data: dict[tuple, tuple] = {}

    def solution(self, omega_p: float, pol: str):
        """(solution, unit-drive layer amplitudes (N, 2), singular flag)."""
        key = (pol, round(omega_p / self._quantum))
        hit = self._data.get(key)
        if hit is not None:
            return hit
        sol = solve_stack(self._stack, omega_p, self._theta_p, pol, field="pump")
        amps, bad, _ = _guarded_unit_drive(sol)
        value = (sol, amps, bool(np.any(bad)))
        with self._lock:
            self._data.setdefault(key, value)
        return value


def _guarded_unit_drive(sol: StackSolution):
    """Layer amplitudes for unit left drive; singularities masked."""
    s = sol.smatrix
    s22 = s[..., 1, 1]
    bad = np.abs(s22) < SINGULAR_CUTOFF
    safe = np.where(bad, 1.0, s22)
    v0 = np.empty(s.shape[:-2] + (2,), dtype=complex)
    v0[..., 0] = 1.0
    v0[..., 1] = -s[..., 1, 0] / safe
    amps = (sol.chain @ v0[..., None])[..., 0]          # (N, *B, 2)
    return amps, bad, v0


def _layer_batch(sol: StackSolution):
    """Layer-region slices (kz, cos, sin) of an angle chain, shape (N, *B)."""
    a = sol.angles
    return a.kz[1:-1], a.cos_theta[1:-1], a.sin_theta[1:-1]


def _prefactor(omega_s, omega_i):
    return -1j * np.sqrt(omega_s * omega_i) / (2.0 * np.sqrt(2.0 * np.pi) * C_NM_FS)


def _phase_sinc(x):
    """e^{ix} sinc(x) with sinc(0) = 1; fast real path when x is real."""
    if np.iscomplexobj(x):
        if not np.any(x.imag):
            x = x.real
        else:
            safe = np.where(x == 0, 1.0, x)
            return np.exp(1j * x) * np.where(x == 0, 1.0, np.sin(safe) / safe)
    s = np.sin(x)
    safe = np.where(x == 0, 1.0, x)
    return (np.cos(x) + 1j * s) * np.where(x == 0, 1.0, s / safe)


def _component_factor(pol, direction, component, cos, sin):
    """One Cartesian component of the unit polarization vector, or None.

    TE is +x everywhere; TM is (0, cos, -sin) forward and (0, cos, +sin)
    backward in region-local angle.  Returns a scalar 1.0, an array, or
    None when the component vanishes identically.
    """
    if pol == TE:
        return 1.0 if component == 0 else None
    if component == 0:
        return None
    if component == 1:
        return cos
    return -sin if direction == _FWD else sin


def _coupling_profile(d, p_spec, s_spec, i_spec):
    """Tensor contraction d : e_p e_s e_i per layer; (N, B) or (N, 1)."""
    (pol_p, dir_p, cos_p, sin_p) = p_spec
    (pol_s, dir_s, cos_s, sin_s) = s_spec
    (pol_i, dir_i, cos_i, sin_i) = i_spec
    total = None
    for x in _POL_COMPONENTS[pol_p]:
        fx = _component_factor(pol_p, dir_p, x, cos_p, sin_p)
        if fx is None:
            continue
        for y in _POL_COMPONENTS[pol_s]:
            fy = _component_factor(pol_s, dir_s, y, cos_s, sin_s)
            if fy is None:
                continue
            for z in _POL_COMPONENTS[pol_i]:
                fz = _component_factor(pol_i, dir_i, z, cos_i, sin_i)
                if fz is None:
                    continue
                dslice = d[:, x, y, z]
                if not dslice.any():
                    continue
                term = dslice[:, None] * fx * fy * fz
                if term.ndim == 1:
                    term = term[:, None]
                total = term if total is None else total + term
    return total


def _assemble_batch(
    stack: Stack,
    pump_data: dict,     # pol -> (amps (N,B,2), kz/cos/sin (N,B))
    sig_data: dict,      # pol -> (conj exit coeffs (N,B,2,2), kz/cos/sin)
    idl_data: dict,
    pump_weights: dict,
    sig_weights: dict,
    idl_weights: dict,
    pref: np.ndarray,    # (B,)
    valid: np.ndarray,   # (B,) bool
) -> np.ndarray:
    """Sum layer terms into the four channel sheets; returns (B, 2, 2)."""
    d = stack.chi2_array()
    thick = stack.thicknesses_nm[:, None]
    b = pref.shape[0]
    out = np.zeros((b, 2, 2), dtype=complex)
    for pol_p, (amp_p, kz_p, cos_p, sin_p) in pump_data.items():
        for pol_s, (cexit_s, kz_s, cos_s, sin_s) in sig_data.items():
            w_s = sig_weights[pol_s]
            for pol_i, (cexit_i, kz_i, cos_i, sin_i) in idl_data.items():
                w = w_s * idl_weights[pol_i]
                for dir_p in (_FWD, _BWD):
                    kp = _DIR_SIGN[dir_p] * kz_p
                    for dir_s in (_FWD, _BWD):
                        ks = _DIR_SIGN[dir_s] * kz_s
                        for dir_i in (_FWD, _BWD):
                            coupling = _coupling_profile(
                                d,
                                (pol_p, dir_p, cos_p, sin_p),
                                (pol_s, dir_s, cos_s, sin_s),
                                (pol_i, dir_i, cos_i, sin_i),
                            )
                            if coupling is None:
                                continue
                            dk = kp - ks - _DIR_SIGN[dir_i] * kz_i
                            terms = (
                                coupling
                                * amp_p[:, :, dir_p]
                                * (thick * _phase_sinc(0.5 * dk * thick))
                            )
                            out += w * np.einsum(
                                "lb,lbs,lbi->bsi",
                                terms,
                                cexit_s[:, :, dir_s, :],
                                cexit_i[:, :, dir_i, :],
                            )
    out *= (pref * valid)[:, None, None]
    return out


def _incident_amplitude(pump: PumpSpec, omega_p):
    """Spectral drive amplitude: Gaussian spectrum, or the cw line weight."""
    if pump.kind == "gaussian":
        return pump_spectrum(pump, omega_p)
    return np.broadcast_to(pump.amplitude + 0.0j, np.shape(omega_p)).copy()


def _needed_pol_sets(stack: Stack, pump: PumpSpec, geometry: EmissionGeometry):
    """Polarisation sets that can contribute, given tensor and analyzers."""
    d = stack.chi2_array()
    w_pump = dict(zip((TE, TM), pump_polarization_split(pump)))
    w_sig = _analyzer_weights(geometry.phi_s)
    w_idl = _analyzer_weights(geometry.phi_i)
    return (
        (_coupled_pols(d, 0, w_pump), w_pump),
        (_coupled_pols(d, 1, w_sig), w_sig),
        (_coupled_pols(d, 2, w_idl), w_idl),
    )


def _exit_data(stack, omega, theta, pols, field):
    """Per-pol conjugated exit-channel data for one batch.

    The assembly only ever needs the complex conjugates (creation
    operators carry the conjugated channel weights), so they are stored
    conjugated once here.
    """
    data, singular = {}, np.zeros(np.shape(omega), dtype=bool)
    for pol in pols:
        sol = solve_stack(stack, omega, theta, pol, field=field)
        exit_c, bad = _guarded_exit(sol)
        singular |= bad
        kz, cos, sin = _layer_batch(sol)
        data[pol] = (np.conj(exit_c), kz, cos, sin)
    return data, singular


def _pump_data(stack, pump, omega_p, drive, pols, weights, cache=None):
    """Per-pol internal drive amplitudes for one batch; returns (dict, singular)."""
    data, singular = {}, np.zeros(np.shape(drive), dtype=bool)
    for pol in pols:
        if cache is not None and np.ndim(omega_p) == 0:
            sol, unit_amps, any_bad = cache.solution(float(omega_p), pol)
            bad = np.broadcast_to(any_bad, np.shape(drive))
            kz, cos, sin = _layer_batch(sol)
            # scalar-frequency solution: give each layer axis a batch slot
            unit_amps = unit_amps[:, None, :]
            kz, cos, sin = kz[:, None], cos[:, None], sin[:, None]
        else:
            sol = solve_stack(stack, omega_p, pump.theta_p, pol, field="pump")
            unit_amps, bad, _ = _guarded_unit_drive(sol)
            kz, cos, sin = _layer_batch(sol)
        amps = unit_amps * (weights[pol] * drive)[..., None]
        singular = singular | bad
        n = kz.shape[0]
        full = (n,) + np.shape(drive)
        data[pol] = (
            np.broadcast_to(amps, full + (2,)),
            np.broadcast_to(kz, full),
            np.broadcast_to(cos, full),
            np.broadcast_to(sin, full),
        )
    return data, singular


def _repeat_rows(field_data, r0, r1, width):
    """Expand per-row signal data onto the flattened (rows x width) batch."""
    out = {}
    for pol, (exit_c, kz, cos, sin) in field_data.items():
        out[pol] = (
            np.repeat(exit_c[:, r0:r1], width, axis=1),
            np.repeat(kz[:, r0:r1], width, axis=1),
            np.repeat(cos[:, r0:r1], width, axis=1),
            np.repeat(sin[:, r0:r1], width, axis=1),
        )
    return out


def _zero_sheets(shape) -> dict[str, np.ndarray]:
    return {ch: np.zeros(shape, dtype=complex) for ch in CHANNELS}


def _sheets_from(block: np.ndarray) -> dict[str, np.ndarray]:
    return {
        "FF": block[..., _FWD, _FWD],
        "FB": block[..., _FWD, _BWD],
        "BF": block[..., _BWD, _FWD],
        "BB": block[..., _BWD, _BWD],
    }


def jsa(
    stack: Stack,
    pump: PumpSpec,
    geometry: EmissionGeometry,
    grid_s: FrequencyGrid,
    grid_i: FrequencyGrid | None = None,
) -> JsaGrid:
    """Joint spectral amplitude of a Gaussian-pumped stack on a 2-d grid."""
    if pump.kind != "gaussian":
        raise PumpModelError("jsa requires a gaussian pump; use jsa_cw for cw pumping")
    grid_i = grid_i or grid_s
    omega_s = grid_s.values
    omega_i = grid_i.values
    meta = {"stack_hash": stack_hash(stack), "theta_s_rad": geometry.theta_s,
            "singular_points": 0, "forbidden_points": 0}
    (pump_pols, w_pump), (sig_pols, w_sig), (idl_pols, w_idl) = _needed_pol_sets(
        stack, pump, geometry
    )
    if not (pump_pols and sig_pols and idl_pols):
        return JsaGrid(omega_s, omega_i, _zero_sheets((omega_s.size, omega_i.size)),
                       pump, geometry, meta)

    sig_all, sig_singular = _exit_data(
        stack, omega_s, geometry.theta_s, sig_pols, "signal"
    )
    sheets = _zero_sheets((omega_s.size, omega_i.size))
    sin_p = np.sin(pump.theta_p)
    sin_s = np.sin(geometry.theta_s)
    width = omega_i.size
    # work in row chunks so each solve batches a few thousand grid points
    rows_per_chunk = max(1, _CHUNK_TARGET // width)
    for r0 in range(0, omega_s.size, rows_per_chunk):
        r1 = min(r0 + rows_per_chunk, omega_s.size)
        ws_flat = np.repeat(omega_s[r0:r1], width)
        wi_flat = np.tile(omega_i, r1 - r0)
        omega_p = ws_flat + wi_flat
        drive = _incident_amplitude(pump, omega_p)
        pump_chunk, pump_bad = _pump_data(stack, pump, omega_p, drive, pump_pols, w_pump)
        sin_i, propagating = _idler_sines(omega_p, ws_flat, wi_flat, sin_p, sin_s)
        idl_chunk, idl_bad = _exit_data(stack, wi_flat, np.arcsin(sin_i), idl_pols, "idler")
        sig_chunk = _repeat_rows(sig_all, r0, r1, width)
        singular = pump_bad | idl_bad | np.repeat(sig_singular[r0:r1], width)
        valid = propagating & ~singular
        block = _assemble_batch(
            stack, pump_chunk, sig_chunk, idl_chunk, w_pump, w_sig, w_idl,
            _prefactor(ws_flat, wi_flat), valid,
        )
        for ch, sheet in _sheets_from(block).items():
            sheets[ch][r0:r1] = sheet.reshape(r1 - r0, width)
        meta["singular_points"] += int(singular.sum())
        meta["forbidden_points"] += int((~propagating).sum())
    return JsaGrid(omega_s, omega_i, sheets, pump, geometry, meta)


def jsa_cw(
    stack: Stack,
    pump: PumpSpec,
    geometry: EmissionGeometry,
    grid: FrequencyGrid,
    pump_cache: PumpFieldCache | None = None,
) -> CwJsa:
    """Reduced joint amplitude for cw pumping, w_i = w_p0 - w_s."""
    if pump.kind != "cw":
        raise PumpModelError("jsa_cw requires a cw pump; use jsa for pulsed pumping")
    omega_s = grid.values
    omega_i = pump.omega0 - omega_s
    if np.any(omega_i <= 0):
        raise ConfigError("cw grid must satisfy omega_s < omega_p0 everywhere")
    meta = {"stack_hash": stack_hash(stack), "theta_s_rad": geometry.theta_s,
            "singular_points": 0, "forbidden_points": 0}
    (pump_pols, w_pump), (sig_pols, w_sig), (idl_pols, w_idl) = _needed_pol_sets(
        stack, pump, geometry
    )
    if not (pump_pols and sig_pols and idl_pols):
        return CwJsa(omega_s, pump.omega0, _zero_sheets(omega_s.shape), pump,
                     geometry, metadata=meta)

    cache = pump_cache or PumpFieldCache(stack, pump.theta_p)
    drive = _incident_amplitude(pump, np.full_like(omega_s, pump.omega0))
    pump_d, pump_bad = _pump_data(
        stack, pump, np.float64(pump.omega0), drive, pump_pols, w_pump, cache
    )
    sig_d, sig_bad = _exit_data(stack, omega_s, geometry.theta_s, sig_pols, "signal")
    sin_i, propagating = _idler_sines(
        pump.omega0, omega_s, omega_i, np.sin(pump.theta_p), np.sin(geometry.theta_s)
    )
    idl_d, idl_bad = _exit_data(stack, omega_i, np.arcsin(sin_i), idl_pols, "idler")
    singular = pump_bad | sig_bad | idl_bad
    valid = propagating & ~singular
    block = _assemble_batch(
        stack, pump_d, sig_d, idl_d, w_pump, w_sig, w_idl,
        _prefactor(omega_s, omega_i), valid,
    )
    meta["singular_points"] = int(singular.sum())
    meta["forbidden_points"] = int((~propagating).sum())
    return CwJsa(omega_s, pump.omega0, _sheets_from(block), pump, geometry, metadata=meta)


# -- scalar reference path ---------------------------------------------------

@dataclass(eq=False)
class PointContext:
    """Everything needed to evaluate per-layer terms at one grid point."""

    stack: Stack
    omega_p: float
    omega_s: float
    omega_i: float
    forbidden: bool
    pump_solutions: dict       # pol -> StackSolution
    pump_fields: dict          # pol -> (N+2, 2) amplitudes (weights folded in)
    signal_solutions: dict
    signal_exits: dict         # pol -> (N, 2, 2)
    idler_solutions: dict
    idler_exits: dict


def point_context(
    stack: Stack,
    pump: PumpSpec,
    geometry: EmissionGeometry,
    omega_s: float,
    omega_i: float,
    pols: tuple[str, ...] = (TE, TM),
) -> PointContext:
    """Scalar, no-shortcuts evaluation context (reference implementation)."""
    omega_p = omega_s + omega_i
    drive = complex(_incident_amplitude(pump, np.float64(omega_p)))
    w_te, w_tm = pump_polarization_split(pump)
    weights = {TE: w_te, TM: w_tm}
    theta_i = idler_angle(omega_p, omega_s, omega_i, pump.theta_p, geometry.theta_s)
    forbidden = theta_i is None
    pump_solutions, pump_fields = {}, {}
    signal_solutions, signal_exits = {}, {}
    idler_solutions, idler_exits = {}, {}
    for pol in pols:
        psol = solve_stack(stack, omega_p, pump.theta_p, pol, field="pump")
        pump_solutions[pol] = psol
        fmap = internal_field_map(psol, weights[pol] * drive, 0.0)
        pump_fields[pol] = fmap.amplitudes
        ssol = solve_stack(stack, omega_s, geometry.theta_s, pol, field="signal")
        signal_solutions[pol] = ssol
        signal_exits[pol] = exit_decompositions(ssol)
        if not forbidden:
            isol = solve_stack(stack, omega_i, theta_i, pol, field="idler")
            idler_solutions[pol] = isol
            idler_exits[pol] = exit_decompositions(isol)
    return PointContext(
        stack=stack,
        omega_p=omega_p,
        omega_s=omega_s,
        omega_i=omega_i,
        forbidden=forbidden,
        pump_solutions=pump_solutions,
        pump_fields=pump_fields,
        signal_solutions=signal_solutions,
        signal_exits=signal_exits,
        idler_solutions=idler_solutions,
        idler_exits=idler_exits,
    )


def layer_term(
    l: int,
    dir_p: str,
    dir_s: str,
    dir_i: str,
    pol_p: str,
    pol_s: str,
    pol_i: str,
    ctx: PointContext,
) -> complex:
    """One (layer, direction-triple, polarisation-triple) contribution.

    Directions are "F"/"B".  Returns the full term including the common
    prefactor and the internal pump amplitude, but not the exit-channel
    or analyzer weights (those distribute the term onto the sheets).
    """
    if ctx.forbidden:
        return 0.0
    li = l - 1
    dirs = {"F": _FWD, "B": _BWD}
    dp, ds, di = dirs[dir_p], dirs[dir_s], dirs[dir_i]
    layer = ctx.stack.layers[li]

    def vec(sol, pol, direction):
        a = sol.angles
        return _pol_vector(pol, direction, a.cos_theta[1 + li], a.sin_theta[1 + li])

    e_p = vec(ctx.pump_solutions[pol_p], pol_p, dp)
    e_s = vec(ctx.signal_solutions[pol_s], pol_s, ds)
    e_i = vec(ctx.idler_solutions[pol_i], pol_i, di)
    coupling = np.einsum("xyz,x,y,z->", layer.chi2_pm_per_v, e_p, e_s, e_i)
    if coupling == 0.0:
        return 0.0

    def kz(sol, direction):
        return _DIR_SIGN[direction] * sol.angles.kz[1 + li]

    dk = (
        kz(ctx.pump_solutions[pol_p], dp)
        - kz(ctx.signal_solutions[pol_s], ds)
        - kz(ctx.idler_solutions[pol_i], di)
    )
    amp = ctx.pump_fields[pol_p][1 + li][dp]
    thick = layer.thickness_nm
    return complex(
        _prefactor(ctx.omega_s, ctx.omega_i)
        * coupling
        * amp
        * thick
        * _phase_sinc(0.5 * dk * thick)
    )


def jsa_point(
    stack: Stack,
    pump: PumpSpec,
    geometry: EmissionGeometry,
    omega_s: float,
    omega_i: float,
) -> dict[str, complex]:
    """Scalar assembly of all four channels at one grid point.

    Slow, loop-based reference used to pin the vectorised `jsa` path.
    """
    ctx = point_context(stack, pump, geometry, omega_s, omega_i)
    out = {ch: 0.0 + 0.0j for ch in CHANNELS}
    if ctx.forbidden:
        return out
    w_sig = _analyzer_weights(geometry.phi_s)
    w_idl = _analyzer_weights(geometry.phi_i)
    names = {0: "F", 1: "B"}
    for pol_p in (TE, TM):
        for pol_s in (TE, TM):
            for pol_i in (TE, TM):
                w = w_sig[pol_s] * w_idl[pol_i]
                if w == 0.0:
                    continue
                for dp in (_FWD, _BWD):
                    for ds in (_FWD, _BWD):
                        for di in (_FWD, _BWD):
                            for l in range(1, stack.n_layers + 1):
                                term = layer_term(
                                    l, names[dp], names[ds], names[di],
                                    pol_p, pol_s, pol_i, ctx,
                                )
                                if term == 0.0:
                                    continue
                                ds_coeff = ctx.signal_exits[pol_s][l - 1][ds]
                                di_coeff = ctx.idler_exits[pol_i][l - 1][di]
                                for cs in (_FWD, _BWD):
                                    for ci in (_FWD, _BWD):
                                        ch = names[cs] + names[ci]
                                        out[ch] += (
                                            w
                                            * term
                                            * np.conj(ds_coeff[cs])
                                            * np.conj(di_coeff[ci])
                                        )
    return out
