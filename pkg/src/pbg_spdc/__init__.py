"""Photon-pair generation in one-dimensional nonlinear photonic-band-gap stacks.

The package is organised around a transfer-matrix description of a layered
stack: `materials` and `structure` define the medium, `propagation` solves
the linear plane-wave problem per frequency/angle/polarization, `pump`
models the classical drive, `spdc` assembles the joint spectral amplitude
of emitted photon pairs, and `observables` derives measurable quantities
(spectra, fluxes, time-domain correlations, Hong-Ou-Mandel traces,
relative efficiency).  `cli` exposes everything as batch subcommands.
"""

__version__ = "0.1.0"

from .materials import (
    DispersionModel,
    MaterialRecord,
    MaterialRegistry,
    load_materials,
    refractive_index,
)
from .structure import (
    Layer,
    Stack,
    boundary_positions,
    build_periodic,
    load_stack,
    serialize_stack,
    stack_hash,
)
from .pump import PumpSpec, pump_polarization_split, pump_spectrum
from .spdc import (
    CwJsa,
    EmissionGeometry,
    FrequencyGrid,
    JsaGrid,
    idler_angle,
    jsa,
    jsa_cw,
)
