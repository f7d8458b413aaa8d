"""Unit conventions and collected scale constants.

All lengths are in nanometers, times in femtoseconds, and angular
frequencies in rad/fs, which keeps optical-band numbers of order one.
Dimensional prefactors that only fix absolute units (hbar, epsilon_0,
beam area) are collected into `ScaleConstants`; every shipped observable
is either a ratio or reported in arbitrary units consistent across runs.
"""

from dataclasses import dataclass

import numpy as np

#: Vacuum speed of light in nm/fs.
C_NM_FS = 299.792458

#: Continuous-wave squared-modulus quantities are quoted per unit time;
#: the formal delta-squared collapses to this single constant factor.
CW_RATE_NORM = 1.0 / (2.0 * np.pi)


@dataclass(frozen=True)
class ScaleConstants:
    """Collected dimensional constants; defaults give arbitrary units."""

    hbar: float = 1.0
    epsilon0: float = 1.0
    c: float = C_NM_FS
    beam_area: float = 1.0

    def __post_init__(self):
        if min(self.hbar, self.epsilon0, self.c, self.beam_area) <= 0:
            raise ValueError("scale constants must be strictly positive")


DEFAULT_SCALE = ScaleConstants()


def vacuum_wavelength_nm(omega):
    """Vacuum wavelength (nm) for angular frequency omega (rad/fs)."""
    return 2.0 * np.pi * C_NM_FS / omega


def angular_frequency(wavelength_nm):
    """Angular frequency (rad/fs) for vacuum wavelength (nm)."""
    return 2.0 * np.pi * C_NM_FS / wavelength_nm
