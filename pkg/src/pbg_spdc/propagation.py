"""Plane-wave transfer-matrix solver for the layered stack.

Per frequency, incidence angle, and polarization this module builds the
Snell angle chain across all regions, the 2x2 boundary and propagation
matrices, the whole-structure matrix S, internal field maps for a
classical drive, and the decomposition of in-layer wave amplitudes onto
the two exit channels (right-exit forward, left-exit backward).

Conventions fixed project-wide:

* Regions are numbered 0..N+1 (left ambient, N layers, right ambient);
  boundary l sits between regions l and l+1.
* Amplitude pairs are (forward, backward) with respect to +z.  In-layer
  amplitudes are referenced at the layer's left edge z_{l-1}, matching
  the per-layer plane-wave decomposition exp(+-i k_z (z - z_{l-1})).
* Evanescent regions take cos(theta) = +i sqrt(sin^2 - 1), so forward
  waves decay toward +z (Im k_z >= 0).
* TE unit polarization is +x in every region and direction; TM forward
  is (0, cos, -sin) and TM backward (0, cos, +sin) in region-local angle.

All operations broadcast over arrays of (omega, theta_in) with a common
batch shape; they are pure functions of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C_NM_FS
from .errors import DegenerateAngleError, NumericalError, SingularStructureError
from .materials import refractive_index
from .structure import Stack

TE = "TE"
TM = "TM"

#: |cos theta| below this is treated as unresolvable grazing incidence.
GRAZING_CUTOFF = 1e-9

#: |S11| or |S22| below this makes the exit/drive inversion singular.
SINGULAR_CUTOFF = 1e-14


@dataclass(frozen=True, eq=False)
class AngleSet:
    """Per-region propagation data for one field at one polarisation-free
    angle chain: indices, Snell angles, and z wave-vector components."""

    omega: np.ndarray          # (*B,) rad/fs
    index: np.ndarray          # (N+2, *B) real
    sin_theta: np.ndarray      # (N+2, *B) real
    cos_theta: np.ndarray      # (N+2, *B) complex
    kz: np.ndarray             # (N+2, *B) complex, rad/nm
    field: str = "signal"

    @property
    def n_regions(self) -> int:
        return self.index.shape[0]


@dataclass(frozen=True, eq=False)
class StackSolution:
    """All matrix factors of one (stack, omega, theta, pol) configuration.

    Boundary matrices are symmetric 2x2 of the form [[a, b], [b, a]] and
    propagation matrices diagonal phases, so only their scalar coefficients
    are stored; the left-edge chains and the whole-structure matrix are
    materialised.
    """

    angles: AngleSet
    pol: str
    boundary_diag: np.ndarray   # (N+1, *B) coefficient a of each boundary
    boundary_off: np.ndarray    # (N+1, *B) coefficient b of each boundary
    layer_phase: np.ndarray     # (N, *B) e^{+i kz L} per layer
    chain: np.ndarray           # (N, *B, 2, 2) region-0 -> layer-l left edge
    smatrix: np.ndarray         # (*B, 2, 2) whole-structure matrix


@dataclass(frozen=True, eq=False)
class FieldMap:
    """Classical (forward, backward) amplitudes in every region, layers
    referenced at their left edge."""

    omega: np.ndarray
    pol: str
    amplitudes: np.ndarray    # (N+2, *B, 2) complex


def _region_indices(stack: Stack, wavelength_nm) -> np.ndarray:
    lam = np.asarray(wavelength_nm, dtype=float)
    materials = [stack.ambient_left] + [l.material for l in stack.layers]
    materials.append(stack.ambient_right)
    evaluated: dict[int, np.ndarray] = {}
    rows = []
    for mat in materials:
        if id(mat) not in evaluated:
            evaluated[id(mat)] = np.asarray(refractive_index(mat, lam), dtype=float)
        rows.append(evaluated[id(mat)])
    return np.stack([np.broadcast_to(r, lam.shape) for r in rows])


def snell_chain(stack: Stack, omega, theta_in, field: str = "signal") -> AngleSet:
    """Snell angle chain n^(l) sin theta^(l) = const across all regions.

    Accepts scalar or broadcastable arrays for omega (rad/fs) and theta_in
    (rad, in the left ambient).  Where |sin| exceeds one the region is
    evanescent and cos takes the decaying-forward branch +i sqrt(sin^2-1).
    """
    omega_a, theta_a = np.broadcast_arrays(
        np.asarray(omega, dtype=float), np.asarray(theta_in, dtype=float)
    )
    if np.any(omega_a <= 0):
        raise ValueError("omega must be > 0")
    lam = 2.0 * np.pi * C_NM_FS / omega_a
    n = _region_indices(stack, lam)
    transverse = n[0] * np.sin(theta_a)            # conserved n sin(theta)
    sin = transverse / n
    cos = np.sqrt(1.0 - sin.astype(complex) ** 2)  # principal root: +i for evanescent
    kz = n * (omega_a / C_NM_FS) * cos
    return AngleSet(omega=omega_a, index=n, sin_theta=sin, cos_theta=cos, kz=kz, field=field)


def _boundary_coefficients(angles: AngleSet, pol: str):
    """(a, b) with boundary matrix [[a, b], [b, a]], shape (N+1, *B) each."""
    cos, n = angles.cos_theta, angles.index
    if np.any(np.abs(cos) < GRAZING_CUTOFF):
        raise DegenerateAngleError("grazing propagation: |cos theta| below cutoff")
    f = cos[:-1] / cos[1:]
    g = n[:-1] / n[1:]
    if pol == TE:
        fg = f * g
        return 0.5 * (1.0 + fg), 0.5 * (1.0 - fg)
    if pol == TM:
        return 0.5 * (f + g), 0.5 * (f - g)
    raise ValueError(f"polarization must be TE or TM, got {pol!r}")


def _symmetric_matrix(a, b) -> np.ndarray:
    out = np.empty(np.shape(a) + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = b
    out[..., 1, 1] = a
    return out


def boundary_matrix(l: int, pol: str, angles: AngleSet, stack: Stack) -> np.ndarray:
    """Transfer matrix of boundary l (0..N) between regions l and l+1."""
    if not 0 <= l <= stack.n_layers:
        raise IndexError(f"boundary index {l} outside 0..{stack.n_layers}")
    a, b = _boundary_coefficients(angles, pol)
    return _symmetric_matrix(a[l], b[l])


def propagation_matrix(l: int, angles: AngleSet, stack: Stack) -> np.ndarray:
    """Free-propagation matrix diag(e^{+i kz L}, e^{-i kz L}) of layer l (1..N)."""
    if not 1 <= l <= stack.n_layers:
        raise IndexError(f"layer index {l} outside 1..{stack.n_layers}")
    phase = np.exp(1j * angles.kz[l] * stack.layers[l - 1].thickness_nm)
    out = np.zeros(np.shape(phase) + (2, 2), dtype=complex)
    out[..., 0, 0] = phase
    out[..., 1, 1] = 1.0 / phase
    return out


def solve_stack(stack: Stack, omega, theta_in, pol: str, field: str = "signal") -> StackSolution:
    """Assemble boundary/propagation factors, left-edge chains, and S."""
    angles = snell_chain(stack, omega, theta_in, field)
    a, b = _boundary_coefficients(angles, pol)
    n = stack.n_layers
    thick = stack.thicknesses_nm.reshape((-1,) + (1,) * (angles.kz.ndim - 1))
    phase = np.exp(1j * angles.kz[1:-1] * thick)
    chain = np.empty((n,) + np.shape(a[0]) + (2, 2), dtype=complex)
    chain[0] = _symmetric_matrix(a[0], b[0])

    def advance(l, current):
        # T_l @ P_l @ current, exploiting diagonal P and symmetric T
        top = phase[l - 1][..., None] * current[..., 0, :]
        bot = current[..., 1, :] / phase[l - 1][..., None]
        out = np.empty_like(current)
        out[..., 0, :] = a[l][..., None] * top + b[l][..., None] * bot
        out[..., 1, :] = b[l][..., None] * top + a[l][..., None] * bot
        return out

    for l in range(1, n):
        chain[l] = advance(l, chain[l - 1])
    smatrix = advance(n, chain[n - 1])
    return StackSolution(angles=angles, pol=pol, boundary_diag=a, boundary_off=b,
                         layer_phase=phase, chain=chain, smatrix=smatrix)


def structure_matrix(stack: Stack, omega, theta_in, pol: str, field: str = "signal") -> np.ndarray:
    """Whole-structure matrix mapping region-0 to region-(N+1) amplitudes."""
    return solve_stack(stack, omega, theta_in, pol, field).smatrix


def transmission_reflection(smatrix: np.ndarray):
    """Amplitude (t, r) for left-only incidence with a right radiation condition."""
    s = np.asarray(smatrix)
    s22 = s[..., 1, 1]
    if np.any(np.abs(s22) < SINGULAR_CUTOFF):
        raise SingularStructureError("structure matrix S22 is numerically zero")
    det = s[..., 0, 0] * s22 - s[..., 0, 1] * s[..., 1, 0]
    return det / s22, -s[..., 1, 0] / s22


def transmittance_reflectance(stack: Stack, omega, theta_in, pol: str, field: str = "signal"):
    """Power (T, R), with the n cos(theta) flux factor between the ambients."""
    sol = solve_stack(stack, omega, theta_in, pol, field)
    t, r = transmission_reflection(sol.smatrix)
    a = sol.angles
    flux_in = (a.index[0] * a.cos_theta[0]).real
    flux_out = (a.index[-1] * a.cos_theta[-1]).real
    return np.abs(t) ** 2 * flux_out / flux_in, np.abs(r) ** 2


def _drive_boundary_matrix(smatrix: np.ndarray) -> np.ndarray:
    """Map (incident-left, incident-right) to the full region-0 pair."""
    s = np.asarray(smatrix)
    s22 = s[..., 1, 1]
    if np.any(np.abs(s22) < SINGULAR_CUTOFF):
        raise SingularStructureError("structure matrix S22 is numerically zero")
    m = np.zeros(s.shape, dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = -s[..., 1, 0] / s22
    m[..., 1, 1] = 1.0 / s22
    return m


def _exit_boundary_matrix(smatrix: np.ndarray) -> np.ndarray:
    """Map (right-exit forward, left-exit backward) to the region-0 pair."""
    s = np.asarray(smatrix)
    s11 = s[..., 0, 0]
    if np.any(np.abs(s11) < SINGULAR_CUTOFF):
        raise SingularStructureError("structure matrix S11 is numerically zero")
    m = np.zeros(s.shape, dtype=complex)
    m[..., 0, 0] = 1.0 / s11
    m[..., 0, 1] = -s[..., 0, 1] / s11
    m[..., 1, 1] = 1.0
    return m


def internal_field_map(sol: StackSolution, a_left, a_right) -> FieldMap:
    """Per-region drive amplitudes for given incident amplitudes."""
    drive = _drive_boundary_matrix(sol.smatrix)
    left, right = np.broadcast_arrays(
        np.asarray(a_left, dtype=complex), np.asarray(a_right, dtype=complex)
    )
    incident = np.broadcast_to(
        np.stack((left, right), axis=-1), sol.smatrix.shape[:-2] + (2,)
    )
    v0 = (drive @ incident[..., None])[..., 0]
    n = sol.chain.shape[0]
    amps = np.empty((n + 2,) + v0.shape, dtype=complex)
    amps[0] = v0
    for l in range(n):
        amps[l + 1] = (sol.chain[l] @ v0[..., None])[..., 0]
    amps[n + 1] = (sol.smatrix @ v0[..., None])[..., 0]
    return FieldMap(omega=sol.angles.omega, pol=sol.pol, amplitudes=amps)


def internal_pump_field(stack: Stack, omega_p, theta_p, pol: str,
                        a_in_left=1.0, a_in_right=0.0) -> FieldMap:
    """Classical drive amplitudes in every region at each layer's left edge."""
    sol = solve_stack(stack, omega_p, theta_p, pol, field="pump")
    return internal_field_map(sol, a_in_left, a_in_right)


def exit_decompositions(sol: StackSolution) -> np.ndarray:
    """Coefficients mapping exit-channel amplitudes to in-layer amplitudes.

    Returns shape (N, *B, 2, 2): entry [l-1, ..., d, c] is the amplitude of
    internal direction d (0 forward, 1 backward) in layer l, referenced at
    the layer's left edge, carried by exit channel c (0 right-exit forward,
    1 left-exit backward).
    """
    exit_map = _exit_boundary_matrix(sol.smatrix)
    return sol.chain @ exit_map


def exit_decomposition(stack: Stack, omega, theta_in, pol: str, field: str, l: int) -> np.ndarray:
    """Exit-channel decomposition for one layer l (1..N)."""
    if not 1 <= l <= stack.n_layers:
        raise IndexError(f"layer index {l} outside 1..{stack.n_layers}")
    sol = solve_stack(stack, omega, theta_in, pol, field)
    return exit_decompositions(sol)[l - 1]


def repropagate(sol: StackSolution, field_map: FieldMap) -> FieldMap:
    """Push the region-0 amplitudes through the boundary recursion again.

    Used as a self-consistency check: the result must coincide with the
    input map.
    """
    amps = np.empty_like(field_map.amplitudes)
    n = sol.chain.shape[0]
    a, b = sol.boundary_diag, sol.boundary_off
    amps[0] = field_map.amplitudes[0]
    current = _symmetric_matrix(a[0], b[0]) @ amps[0][..., None]
    amps[1] = current[..., 0]
    for l in range(1, n + 1):
        propagated = np.empty_like(current)
        propagated[..., 0, :] = sol.layer_phase[l - 1][..., None] * current[..., 0, :]
        propagated[..., 1, :] = current[..., 1, :] / sol.layer_phase[l - 1][..., None]
        current = _symmetric_matrix(a[l], b[l]) @ propagated
        amps[l + 1] = current[..., 0]
    return FieldMap(omega=field_map.omega, pol=field_map.pol, amplitudes=amps)


def band_edge_resonance(stack: Stack, lambda_window=(560.0, 780.0), points: int = 4401,
                        pol: str = TE, theta_in: float = 0.0) -> float:
    """First transmission resonance on the long-wavelength side of the gap.

    Scans the transmittance over the window, locates the deepest minimum
    (the gap), and returns the wavelength of the first local transmission
    maximum above it, refined by a parabolic fit through the peak sample.
    """
    lam = np.linspace(lambda_window[0], lambda_window[1], points)
    omega = 2.0 * np.pi * C_NM_FS / lam
    t_pow, _ = transmittance_reflectance(stack, omega, theta_in, pol, field="pump")
    i_gap = int(np.argmin(t_pow))
    for i in range(i_gap + 1, points - 1):
        if t_pow[i] > 0.5 and t_pow[i] >= t_pow[i - 1] and t_pow[i] >= t_pow[i + 1]:
            y0, y1, y2 = t_pow[i - 1], t_pow[i], t_pow[i + 1]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
            return float(lam[i] + shift * (lam[1] - lam[0]))
    raise NumericalError("no transmission resonance above the gap inside the scan window")
