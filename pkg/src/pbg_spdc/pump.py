"""Classical pump model: cw line or chirped Gaussian pulse.

A Gaussian pump pulse with field envelope exp(-(1 + i a) t^2 / tau^2) has
the spectral amplitude

    xi * tau / sqrt(2 (1 + i a)) * exp(-tau^2 (w - w0)^2 / (4 (1 + i a))),

per the unitary 1/sqrt(2 pi) Fourier convention.  cw pumping is a formal
delta line at the carrier and is handled symbolically by the dedicated cw
code paths downstream; `pump_spectrum` refuses it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import angular_frequency
from .errors import ConfigError, PumpModelError


@dataclass(frozen=True)
class PumpSpec:
    kind: str                    # "cw" | "gaussian"
    omega0: float                # carrier, rad/fs
    amplitude: float = 1.0       # xi_p, arbitrary field units
    tau_fs: float | None = None  # pulse duration (gaussian only)
    chirp: float = 0.0           # a_p
    theta_p: float = 0.0         # incidence angle, rad
    phi_p: float = 0.0           # polarization angle from the TE axis, rad

    def __post_init__(self):
        if self.kind not in ("cw", "gaussian"):
            raise ConfigError(f"pump kind must be cw or gaussian, got {self.kind!r}")
        if self.omega0 <= 0:
            raise ConfigError("pump carrier frequency must be > 0")
        if self.amplitude < 0:
            raise ConfigError("pump amplitude must be >= 0")
        if self.kind == "gaussian" and not (self.tau_fs and self.tau_fs > 0):
            raise ConfigError("gaussian pump requires tau_fs > 0")

    @classmethod
    def cw(cls, wavelength_nm, amplitude=1.0, theta_p=0.0, phi_p=0.0):
        return cls(kind="cw", omega0=angular_frequency(wavelength_nm),
                   amplitude=amplitude, theta_p=theta_p, phi_p=phi_p)

    @classmethod
    def gaussian(cls, wavelength_nm, tau_fs, chirp=0.0, amplitude=1.0,
                 theta_p=0.0, phi_p=0.0):
        return cls(kind="gaussian", omega0=angular_frequency(wavelength_nm),
                   amplitude=amplitude, tau_fs=tau_fs, chirp=chirp,
                   theta_p=theta_p, phi_p=phi_p)


def pump_spectrum(spec: PumpSpec, omega_p):
    """Complex spectral amplitude of a Gaussian pump at omega_p (rad/fs)."""
    if spec.kind != "gaussian":
        raise PumpModelError(
            "pump_spectrum applies to gaussian pumps only; cw pumping is a "
            "symbolic delta line, use the cw code path (jsa_cw)"
        )
    w = np.asarray(omega_p, dtype=float)
    den = 1.0 + 1j * spec.chirp
    return (
        spec.amplitude
        * spec.tau_fs / np.sqrt(2.0 * den)
        * np.exp(-spec.tau_fs**2 * (w - spec.omega0) ** 2 / (4.0 * den))
    )


def pump_polarization_split(spec: PumpSpec):
    """(TE, TM) field-amplitude weights; their squares sum to one."""
    return np.cos(spec.phi_p), np.sin(spec.phi_p)
