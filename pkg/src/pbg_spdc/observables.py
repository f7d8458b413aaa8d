"""Measurable quantities derived from joint spectral amplitudes.

Everything here is a pure transformation of `JsaGrid`/`CwJsa` data:
photon-pair numbers, energy spectra, the time-domain two-photon
amplitude, photon fluxes, Hong-Ou-Mandel coincidence traces, and the
relative pair-generation efficiency against an ideal index-matched,
fully phase-matched reference containing the same nonlinear budget.

Quadrature is composite trapezoid on the uniform grids throughout; the
fast-transform paths use plain Riemann sums, which coincide once the
amplitude has decayed at the grid edges.  cw quantities are rates per
unit time and carry the single constant `CW_RATE_NORM`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CW_RATE_NORM, DEFAULT_SCALE, ScaleConstants, vacuum_wavelength_nm
from .errors import GridError, UndefinedEfficiencyError
from .pump import PumpSpec, pump_spectrum
from .spdc import CHANNELS, CwJsa, FrequencyGrid, JsaGrid, _prefactor
from .structure import Stack, total_nonlinear_length

__all__ = [
    "SpectrumResult",
    "SpectrumStats",
    "TimeDomainTpa",
    "FluxResult",
    "HomScan",
    "ReferenceJsa",
    "EfficiencyReport",
    "fwhm",
    "dip_statistics",
    "joint_photon_number",
    "marginal_signal_number",
    "total_pairs",
    "energy_spectrum",
    "time_domain_tpa",
    "photon_flux",
    "hom_scan",
    "reference_jsa",
    "relative_efficiency",
]


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.full(x.shape, x[1] - x[0] if x.size > 1 else 1.0)
    if x.size > 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w


def _require_uniform(x: np.ndarray, what: str):
    if x.size > 2:
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise GridError(f"{what}: uniform grid required")


# -- curve statistics ---------------------------------------------------------

def _half_maximum_crossings(x, y):
    """Outermost crossings of half the global maximum, or None if y <= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    peak = y.max()
    if peak <= 0:
        return None
    half = 0.5 * peak
    above = np.nonzero(y >= half)[0]
    i0, i1 = above[0], above[-1]
    if i0 == 0:
        lo = x[0]
    else:
        f = (half - y[i0 - 1]) / (y[i0] - y[i0 - 1])
        lo = x[i0 - 1] + f * (x[i0] - x[i0 - 1])
    if i1 == x.size - 1:
        hi = x[-1]
    else:
        f = (half - y[i1 + 1]) / (y[i1] - y[i1 + 1])
        hi = x[i1 + 1] - f * (x[i1 + 1] - x[i1])
    return float(lo), float(hi)


def fwhm(x, y) -> float:
    """Full width at half the global maximum, outermost crossings.

    Linear interpolation between samples; multi-peak curves report the
    full active width between the outermost half-maximum crossings.
    """
    crossings = _half_maximum_crossings(x, y)
    if crossings is None:
        return 0.0
    lo, hi = crossings
    return hi - lo


def dip_statistics(tau, rn, window_fraction: float = 0.5):
    """(dip position, dip FWHM, visibility) of a coincidence trace.

    The dip is searched inside the central `window_fraction` of the delay
    axis to avoid edge artifacts.  The FWHM uses the outermost half-depth
    crossings of 1 - R_n; visibility is rho/(2 - rho) at the extremal rho.
    """
    tau = np.asarray(tau, dtype=float)
    rn = np.asarray(rn, dtype=float)
    span = tau[-1] - tau[0]
    mid = 0.5 * (tau[0] + tau[-1])
    inside = np.abs(tau - mid) <= 0.5 * window_fraction * span
    idx = np.nonzero(inside)[0]
    rho = 1.0 - rn
    i_ext = idx[np.argmax(np.abs(rho[idx]))]
    rho_peak = rho[i_ext]
    i_min = idx[np.argmin(rn[idx])]
    tau_c = float(tau[i_min])
    depth_curve = np.clip(rho, 0.0, None)
    width = fwhm(tau, depth_curve)
    visibility = float(rho_peak / (2.0 - rho_peak))
    return tau_c, width, visibility


# -- photon numbers -----------------------------------------------------------

def _nearest_index(grid: np.ndarray, value: float, what: str, strict: bool) -> int:
    i = int(np.argmin(np.abs(grid - value)))
    step = grid[1] - grid[0] if grid.size > 1 else max(abs(value), 1.0)
    if abs(grid[i] - value) > 1e-9 * abs(step):
        if strict:
            raise GridError(f"{what}={value!r} is not a grid node")
        warnings.warn(f"{what}={value!r} off grid; using nearest node", stacklevel=3)
    return i


def joint_photon_number(jsa_grid: JsaGrid, omega_s, omega_i, d_omega_s, d_omega_i,
                        strict: bool = False) -> dict[str, float]:
    """Mean pair number in a frequency cell around (omega_s, omega_i)."""
    j = _nearest_index(jsa_grid.omega_s, omega_s, "omega_s", strict)
    k = _nearest_index(jsa_grid.omega_i, omega_i, "omega_i", strict)
    return {
        ch: float(np.abs(sheet[j, k]) ** 2 * d_omega_s * d_omega_i)
        for ch, sheet in jsa_grid.channels.items()
    }


def marginal_signal_number(jsa_grid: JsaGrid, omega_s, d_omega_s,
                           strict: bool = False) -> dict[str, float]:
    """Mean signal-photon number in d_omega_s around omega_s (idler traced out)."""
    j = _nearest_index(jsa_grid.omega_s, omega_s, "omega_s", strict)
    return {
        ch: float(np.trapezoid(np.abs(sheet[j]) ** 2, jsa_grid.omega_i) * d_omega_s)
        for ch, sheet in jsa_grid.channels.items()
    }


def total_pairs(jsa_grid) -> dict[str, float]:
    """Overall emitted pair number per channel (pairs per second for cw)."""
    if isinstance(jsa_grid, CwJsa):
        return {
            ch: float(CW_RATE_NORM * np.trapezoid(np.abs(g) ** 2, jsa_grid.omega_s))
            for ch, g in jsa_grid.channels.items()
        }
    return {
        ch: float(
            np.trapezoid(np.trapezoid(np.abs(sheet) ** 2, jsa_grid.omega_i, axis=1),
                         jsa_grid.omega_s)
        )
        for ch, sheet in jsa_grid.channels.items()
    }


# -- energy spectra -----------------------------------------------------------

@dataclass(frozen=True)
class SpectrumStats:
    fwhm_lambda_nm: float
    peak_value: float
    peak_omega: float


@dataclass(eq=False)
class SpectrumResult:
    """Signal/idler energy spectra per channel and per exit facet."""

    omega_s: np.ndarray
    omega_i_axis: np.ndarray
    channels: dict[str, np.ndarray]        # signal spectra S^{mn}(omega_s)
    combined: dict[str, np.ndarray]        # sF, sB on omega_s; iF, iB on omega_i_axis

    def curve(self, key: str):
        if key in self.channels:
            return self.omega_s, self.channels[key]
        if key in ("sF", "sB"):
            return self.omega_s, self.combined[key]
        if key in ("iF", "iB"):
            return self.omega_i_axis, self.combined[key]
        raise KeyError(key)

    def stats(self, key: str) -> SpectrumStats:
        x, y = self.curve(key)
        i_peak = int(np.argmax(y))
        crossings = _half_maximum_crossings(x, y)
        if crossings is None:
            width_lambda = 0.0
        else:
            lo, hi = crossings
            width_lambda = abs(vacuum_wavelength_nm(lo) - vacuum_wavelength_nm(hi))
        return SpectrumStats(width_lambda, float(y[i_peak]), float(x[i_peak]))


def energy_spectrum(jsa_grid, scale: ScaleConstants = DEFAULT_SCALE) -> SpectrumResult:
    """Per-channel energy spectra and the per-facet sums.

    Signal facets combine S_sF = S^FF + S^FB and S_sB = S^BF + S^BB; the
    idler facets combine S_iF = S^FF + S^BF and S_iB = S^FB + S^BB on the
    idler frequency axis.
    """
    hbar = scale.hbar
    if isinstance(jsa_grid, CwJsa):
        omega_s = jsa_grid.omega_s
        omega_i = jsa_grid.omega_i
        sig = {
            ch: hbar * omega_s * CW_RATE_NORM * np.abs(g) ** 2
            for ch, g in jsa_grid.channels.items()
        }
        order = np.argsort(omega_i)
        omega_i_axis = omega_i[order]
        idl = {
            ch: (hbar * omega_i * CW_RATE_NORM * np.abs(g) ** 2)[order]
            for ch, g in jsa_grid.channels.items()
        }
    else:
        omega_s = jsa_grid.omega_s
        omega_i_axis = jsa_grid.omega_i
        sig = {
            ch: hbar * omega_s * np.trapezoid(np.abs(s) ** 2, jsa_grid.omega_i, axis=1)
            for ch, s in jsa_grid.channels.items()
        }
        idl = {
            ch: hbar * omega_i_axis * np.trapezoid(np.abs(s) ** 2, omega_s, axis=0)
            for ch, s in jsa_grid.channels.items()
        }
    combined = {
        "sF": sig["FF"] + sig["FB"],
        "sB": sig["BF"] + sig["BB"],
        "iF": idl["FF"] + idl["BF"],
        "iB": idl["FB"] + idl["BB"],
    }
    return SpectrumResult(omega_s, omega_i_axis, sig, combined)


# -- time domain --------------------------------------------------------------

@dataclass(eq=False)
class TimeDomainTpa:
    tau_s: np.ndarray
    tau_i: np.ndarray
    channels: dict[str, np.ndarray]
    normalized: bool
    metadata: dict = field(default_factory=dict)


def _fft_axis(omega: np.ndarray, pad_factor: float):
    step = omega[1] - omega[0]
    m = int(np.ceil(pad_factor * omega.size))
    tau = 2.0 * np.pi * np.fft.fftfreq(m, d=step)
    order = np.argsort(tau)
    return m, tau[order], order


def _window_slice(tau: np.ndarray, window_fs):
    if window_fs is None:
        return slice(None)
    if np.isscalar(window_fs):
        lo, hi = -abs(window_fs), abs(window_fs)
    else:
        lo, hi = window_fs
    i = np.nonzero((tau >= lo) & (tau <= hi))[0]
    if i.size == 0:
        raise GridError("time window excludes every grid point")
    return slice(i[0], i[-1] + 1)


def time_domain_tpa(jsa_grid, pad_factor: float = 2.0, normalize: bool = True,
                    window_fs=None) -> TimeDomainTpa:
    """Two-photon amplitude in detection-time coordinates.

    For pulsed grids this is the weighted 2-d Fourier transform of the
    joint amplitude, computed with a zero-padded fast transform (pad
    factor >= 2 by default).  For cw data the amplitude is stationary and
    is built from the 1-d transform along the frequency axis; its squared
    modulus depends on the detection-time difference only.
    """
    if pad_factor < 1.0:
        raise GridError("pad_factor must be >= 1")
    if isinstance(jsa_grid, CwJsa):
        return _time_domain_cw(jsa_grid, pad_factor, normalize, window_fs)
    omega_s, omega_i = jsa_grid.omega_s, jsa_grid.omega_i
    if omega_s.size < 2 or omega_i.size < 2:
        raise GridError("time map needs at least 2 points per frequency axis")
    _require_uniform(omega_s, "omega_s")
    _require_uniform(omega_i, "omega_i")
    ds, di = omega_s[1] - omega_s[0], omega_i[1] - omega_i[0]
    ms, tau_s, order_s = _fft_axis(omega_s, pad_factor)
    mi, tau_i, order_i = _fft_axis(omega_i, pad_factor)
    w0s, w0i = omega_s.mean(), omega_i.mean()
    weight = np.sqrt(np.outer(omega_s, omega_i) / (w0s * w0i))
    sl_s = _window_slice(tau_s, window_fs)
    sl_i = _window_slice(tau_i, window_fs)
    tau_s_out, tau_i_out = tau_s[sl_s], tau_i[sl_i]
    phase_s = np.exp(-1j * omega_s[0] * tau_s_out)[:, None]
    phase_i = np.exp(-1j * omega_i[0] * tau_i_out)[None, :]
    front = ds * di / (2.0 * np.pi)
    channels = {}
    for ch, sheet in jsa_grid.channels.items():
        f = np.fft.fft2(weight * sheet, s=(ms, mi))
        f = f[np.ix_(order_s, order_i)][sl_s, sl_i]
        channels[ch] = front * phase_s * phase_i * f
    normalized = False
    if normalize:
        for ch, sheet in channels.items():
            w = np.trapezoid(np.trapezoid(np.abs(sheet) ** 2, tau_i_out, axis=1), tau_s_out)
            if w > 0:
                channels[ch] = sheet / np.sqrt(w)
        normalized = True
    return TimeDomainTpa(tau_s_out, tau_i_out, channels, normalized,
                         {"kind": "pulsed", "pad_factor": pad_factor})


def _time_domain_cw(jsa_cw: CwJsa, pad_factor: float, normalize: bool, window_fs):
    omega_s = jsa_cw.omega_s
    if omega_s.size < 2:
        raise GridError("time map needs at least 2 frequency points")
    _require_uniform(omega_s, "omega_s")
    step = omega_s[1] - omega_s[0]
    m = int(np.ceil(max(pad_factor, 2.0) * omega_s.size))
    tau = 2.0 * np.pi * np.fft.fftfreq(m, d=step)
    order = np.argsort(tau)
    tau = tau[order]
    zero_idx = int(np.argmin(np.abs(tau)))
    w0 = jsa_cw.omega_p0 / 2.0
    weight = np.sqrt(omega_s * jsa_cw.omega_i) / w0
    if window_fs is None:
        window_fs = 0.45 * tau[-1]
    sl = _window_slice(tau, window_fs)
    idx = np.arange(sl.start or 0, sl.stop if sl.stop is not None else tau.size)
    if idx.size and (idx[0] - idx[-1] + zero_idx < 0 or idx[-1] - idx[0] + zero_idx >= tau.size):
        raise GridError("time window too wide for the transform range; lower window_fs")
    tau_out = tau[sl]
    diff = idx[:, None] - idx[None, :] + zero_idx
    phase_i = np.exp(-1j * jsa_cw.omega_p0 * tau_out)[None, :]
    front = step / (2.0 * np.pi)
    channels = {}
    for ch, g in jsa_cw.channels.items():
        h = np.fft.fft(weight * g, n=m)[order]
        h = front * np.exp(-1j * omega_s[0] * tau) * h
        channels[ch] = h[diff] * phase_i
    normalized = False
    if normalize:
        for ch, sheet in channels.items():
            w = np.trapezoid(np.trapezoid(np.abs(sheet) ** 2, tau_out, axis=1), tau_out)
            if w > 0:
                channels[ch] = sheet / np.sqrt(w)
        normalized = True
    return TimeDomainTpa(tau_out, tau_out, channels, normalized,
                         {"kind": "cw", "pad_factor": pad_factor})


# -- photon flux --------------------------------------------------------------

@dataclass(eq=False)
class FluxResult:
    tau_s: np.ndarray
    channels: dict[str, np.ndarray]
    method: str


def photon_flux(jsa_grid: JsaGrid, tau_s=None, method: str = "double-frequency",
                scale: ScaleConstants = DEFAULT_SCALE,
                pad_factor: float = 4.0) -> FluxResult:
    """Signal photon flux versus detection time for a pulsed pair state.

    The default path evaluates the double-frequency expression through the
    factorised transform F(tau, w_i) = int dw_s sqrt(w_s) phi e^{-i w_s tau}
    followed by the w_i power integral.  The narrow-idler shortcut instead
    integrates |A(tau_s, tau_i)|^2 over tau_i and is valid when the idler
    spectrum is narrow; it returns its own transform time grid.
    """
    if isinstance(jsa_grid, CwJsa):
        raise GridError("photon flux vs time applies to pulsed grids; cw flux is constant")
    hbar = scale.hbar
    if method == "double-frequency":
        if tau_s is None:
            raise GridError("double-frequency flux needs an explicit tau_s grid")
        tau_s = np.asarray(tau_s, dtype=float)
        omega_s, omega_i = jsa_grid.omega_s, jsa_grid.omega_i
        w = _trapezoid_weights(omega_s) * np.sqrt(omega_s)
        kernel = np.exp(-1j * np.outer(tau_s, omega_s)) * w
        channels = {}
        for ch, sheet in jsa_grid.channels.items():
            f = kernel @ sheet                      # (T, Gi)
            channels[ch] = hbar / (8.0 * np.pi) * np.trapezoid(
                np.abs(f) ** 2, omega_i, axis=1
            )
        return FluxResult(tau_s, channels, method)
    if method == "narrow-idler":
        tpa = time_domain_tpa(jsa_grid, pad_factor=pad_factor, normalize=False)
        w0s = jsa_grid.omega_s.mean()
        channels = {
            ch: hbar * w0s / 4.0 * np.trapezoid(np.abs(sheet) ** 2, tpa.tau_i, axis=1)
            for ch, sheet in tpa.channels.items()
        }
        return FluxResult(tpa.tau_s, channels, method)
    raise GridError(f"unknown flux method {method!r}")


# -- Hong-Ou-Mandel interference ----------------------------------------------

@dataclass(eq=False)
class HomScan:
    tau_l: np.ndarray
    rn: dict[str, np.ndarray]
    dip_center: dict[str, float]
    dip_fwhm: dict[str, float]
    visibility: dict[str, float]


def hom_scan(jsa_grid, tau_l, window_fraction: float = 0.5) -> HomScan:
    """Normalized coincidence-count rate R_n per channel over a delay scan.

    Both photons are rotated to a common polarization, delayed by tau_l,
    and interfered on a balanced beam splitter; the interference term
    exchanges the two photons, so the JSA must be samplable with its
    arguments swapped.  Pulsed grids therefore must be square; cw grids
    must be symmetric about the degenerate frequency.
    """
    tau_l = np.asarray(tau_l, dtype=float)
    rn = {}
    if isinstance(jsa_grid, CwJsa):
        omega_s = jsa_grid.omega_s
        omega_i = jsa_grid.omega_i
        if not np.allclose(omega_s + omega_s[::-1], jsa_grid.omega_p0, rtol=1e-9):
            raise GridError("cw HOM needs a grid symmetric about omega_p0/2")
        w = _trapezoid_weights(omega_s) * omega_s * omega_i
        phase = np.exp(1j * np.outer(tau_l, omega_i - omega_s))
        for ch, g in jsa_grid.channels.items():
            mirror = np.conj(g[::-1])
            r0 = float(np.sum(w * np.abs(g) ** 2))
            if r0 == 0.0:
                rn[ch] = np.ones_like(tau_l)
                continue
            rho = (phase @ (w * g * mirror)).real / r0
            rn[ch] = 1.0 - rho
    else:
        omega_s, omega_i = jsa_grid.omega_s, jsa_grid.omega_i
        if omega_s.shape != omega_i.shape or not np.allclose(omega_s, omega_i, rtol=1e-12):
            raise GridError("pulsed HOM needs a square grid (identical axes)")
        w1 = _trapezoid_weights(omega_s)
        weight = np.outer(w1 * omega_s, w1 * omega_s)
        eplus = np.exp(1j * np.outer(omega_s, tau_l))          # (G, T)
        for ch, sheet in jsa_grid.channels.items():
            m = weight * sheet * np.conj(sheet.T)
            r0 = float(np.sum(weight * np.abs(sheet) ** 2))
            if r0 == 0.0:
                rn[ch] = np.ones_like(tau_l)
                continue
            rho = np.einsum("jt,jt->t", np.conj(eplus), m @ eplus).real / r0
            rn[ch] = 1.0 - rho
    center, width, vis = {}, {}, {}
    for ch, trace in rn.items():
        c, fw, v = dip_statistics(tau_l, trace, window_fraction)
        center[ch], width[ch], vis[ch] = c, fw, v
    return HomScan(tau_l, rn, center, width, vis)


# -- reference structure and relative efficiency ------------------------------

@dataclass(eq=False)
class ReferenceJsa:
    """Ideal fully phase-matched, index-matched emitter with the same
    nonlinear budget; single channel."""

    kind: str                       # "cw" | "pulsed"
    omega_s: np.ndarray
    omega_i: np.ndarray | None
    amplitude: np.ndarray           # (G,) for cw, (Gs, Gi) for pulsed
    omega_p0: float
    weight_mode: str


def reference_jsa(stack: Stack, pump: PumpSpec, grid_s: FrequencyGrid,
                  grid_i: FrequencyGrid | None = None,
                  weight_mode: str = "as-written") -> ReferenceJsa:
    """Joint amplitude of the ideal reference emitter.

    The reference carries |E_p| at the summed frequency, the common
    prefactor, and the full nonlinear budget sum_l max(d^(l)) L_l; no
    propagation or interference factors.  `weight_mode` selects the
    signal-frequency weight pairing: "as-written" uses sqrt(w_s) twice,
    "sqrt-omega-i" uses sqrt(w_s w_i).
    """
    if weight_mode not in ("as-written", "sqrt-omega-i"):
        raise GridError(f"unknown weight mode {weight_mode!r}")
    budget = total_nonlinear_length(stack)
    omega_s = grid_s.values
    if pump.kind == "cw":
        omega_i = pump.omega0 - omega_s
        if np.any(omega_i <= 0):
            raise GridError("cw grid must satisfy omega_s < omega_p0")
        w2 = omega_s if weight_mode == "as-written" else omega_i
        amp = _prefactor(omega_s, w2) * abs(pump.amplitude) * budget
        return ReferenceJsa("cw", omega_s, None, amp, pump.omega0, weight_mode)
    grid_i = grid_i or grid_s
    omega_i = grid_i.values
    omega_p = omega_s[:, None] + omega_i[None, :]
    spectrum = np.abs(pump_spectrum(pump, omega_p))
    w2 = omega_s[:, None] if weight_mode == "as-written" else omega_i[None, :]
    amp = _prefactor(omega_s[:, None], w2) * spectrum * budget
    return ReferenceJsa("pulsed", omega_s, omega_i, amp, pump.omega0, weight_mode)


def _reference_signal_spectrum(ref: ReferenceJsa,
                               scale: ScaleConstants = DEFAULT_SCALE) -> np.ndarray:
    if ref.kind == "cw":
        return scale.hbar * ref.omega_s * CW_RATE_NORM * np.abs(ref.amplitude) ** 2
    return scale.hbar * ref.omega_s * np.trapezoid(
        np.abs(ref.amplitude) ** 2, ref.omega_i, axis=1
    )


@dataclass(eq=False)
class EfficiencyReport:
    omega_s: np.ndarray
    eta: dict[str, np.ndarray]
    eta_total: np.ndarray

    def at(self, omega_s: float, strict: bool = False) -> dict[str, float]:
        i = _nearest_index(self.omega_s, omega_s, "omega_s", strict)
        if not np.isfinite(self.eta_total[i]):
            raise UndefinedEfficiencyError(
                f"reference spectrum vanishes at omega_s={self.omega_s[i]!r}"
            )
        out = {ch: float(v[i]) for ch, v in self.eta.items()}
        out["total"] = float(self.eta_total[i])
        return out


def relative_efficiency(jsa_grid, reference: ReferenceJsa,
                        scale: ScaleConstants = DEFAULT_SCALE) -> EfficiencyReport:
    """Per-channel pair-generation rate relative to the ideal reference."""
    is_cw = isinstance(jsa_grid, CwJsa)
    if (reference.kind == "cw") != is_cw:
        raise GridError("jsa and reference pumping kinds differ")
    if not np.allclose(jsa_grid.omega_s, reference.omega_s, rtol=1e-12):
        raise GridError("jsa and reference frequency grids differ")
    spectrum = energy_spectrum(jsa_grid, scale)
    s_ref = _reference_signal_spectrum(reference, scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = {
            ch: np.where(s_ref > 0, s / s_ref, np.nan)
            for ch, s in spectrum.channels.items()
        }
    eta_total = sum(eta.values())
    return EfficiencyReport(jsa_grid.omega_s, eta, eta_total)
