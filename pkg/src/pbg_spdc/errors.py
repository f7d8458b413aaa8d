"""Exception hierarchy shared across the package.

`ConfigError` covers bad inputs (files, schemas, parameter values) and maps
to CLI exit code 2; `NumericalError` covers singular or degenerate numerics
(exit code 3).  I/O failures propagate as OSError (exit code 4).
"""


class ConfigError(ValueError):
    """Invalid configuration input."""


class MaterialRangeError(ConfigError):
    """Wavelength query outside a dispersion model's validity window."""


class DuplicateMaterialError(ConfigError):
    """Two materials with the same name in one registry."""


class UnknownMaterialError(ConfigError):
    """Stack references a material name absent from the registry."""


class GridError(ConfigError):
    """Frequency/time grid does not meet an operation's requirements."""


class PumpModelError(ConfigError):
    """Operation called with the wrong pump kind."""


class NumericalError(RuntimeError):
    """Singular or degenerate numerical condition."""


class SingularStructureError(NumericalError):
    """Structure matrix element needed for inversion is numerically zero."""


class DegenerateAngleError(NumericalError):
    """Grazing propagation (|cos theta| below cutoff) in some region."""


class UndefinedEfficiencyError(NumericalError):
    """Relative efficiency queried where the reference spectrum vanishes."""
