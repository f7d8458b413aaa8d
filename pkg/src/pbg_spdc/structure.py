"""Layered-stack description: layers, thicknesses, nonlinear tensors.

A `Stack` lists N layers between two semi-infinite ambient media.  Layer l
(1-based) spans z_{l-1}..z_l with thickness L_l; boundary positions follow
by cumulative sum from the input facet z_0.  Each layer carries a full
3x3x3 quadratic nonlinear tensor in pm/V; configs may instead give a
scalar `d_eff_TE` that sets the single xxx component coupling x-polarized
pump, signal, and idler.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .materials import VACUUM, MaterialRecord, MaterialRegistry


@dataclass(frozen=True, eq=False)
class Layer:
    material: MaterialRecord
    thickness_nm: float
    #: chi^(2) tensor d_ijk in pm/V, shape (3, 3, 3).
    chi2_pm_per_v: np.ndarray

    def __post_init__(self):
        if not (self.thickness_nm > 0):
            raise ConfigError(f"layer thickness must be > 0, got {self.thickness_nm}")
        d = np.asarray(self.chi2_pm_per_v, dtype=float)
        if d.shape != (3, 3, 3) or not np.all(np.isfinite(d)):
            raise ConfigError("chi2 tensor must be a finite 3x3x3 array")
        object.__setattr__(self, "chi2_pm_per_v", d)


@dataclass(frozen=True, eq=False)
class Stack:
    ambient_left: MaterialRecord
    layers: tuple[Layer, ...]
    ambient_right: MaterialRecord
    z0_nm: float = 0.0

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ConfigError("a stack needs at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def thicknesses_nm(self) -> np.ndarray:
        return np.array([l.thickness_nm for l in self.layers])

    def chi2_array(self) -> np.ndarray:
        """Per-layer nonlinear tensors stacked to shape (N, 3, 3, 3)."""
        return np.stack([l.chi2_pm_per_v for l in self.layers])


def boundary_positions(stack: Stack) -> np.ndarray:
    """Positions z_0..z_N of the N+1 boundaries, strictly increasing."""
    z = np.empty(stack.n_layers + 1)
    z[0] = stack.z0_nm
    np.cumsum(stack.thicknesses_nm, out=z[1:])
    z[1:] += stack.z0_nm
    return z


def total_nonlinear_length(stack: Stack) -> float:
    """sum_l max(d^(l)) L_l, the phase-matched nonlinear budget (pm/V * nm)."""
    return float(
        sum(l.chi2_pm_per_v.max() * l.thickness_nm for l in stack.layers)
    )


def build_periodic(
    cell: list[Layer],
    repetitions: int,
    terminate_with_first: bool = False,
    ambient_left: MaterialRecord = VACUUM,
    ambient_right: MaterialRecord = VACUUM,
    z0_nm: float = 0.0,
) -> Stack:
    """Expand a unit cell into a periodic stack.

    With `terminate_with_first`, one extra copy of the first cell layer is
    appended, so a 2-layer cell repeated k times yields 2k+1 layers.
    """
    if not cell:
        raise ConfigError("periodic cell must not be empty")
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    layers = list(cell) * repetitions
    if terminate_with_first:
        layers.append(cell[0])
    return Stack(ambient_left, tuple(layers), ambient_right, z0_nm)


def _tensor_from_entry(entry: dict, where: str) -> np.ndarray:
    has_eff = "d_eff_TE_pm_per_V" in entry
    has_full = "d_tensor_pm_per_V" in entry
    if has_eff and has_full:
        raise ConfigError(f"{where}: give d_eff_TE_pm_per_V or d_tensor_pm_per_V, not both")
    d = np.zeros((3, 3, 3))
    if has_eff:
        d[0, 0, 0] = float(entry["d_eff_TE_pm_per_V"])
    elif has_full:
        d = np.asarray(entry["d_tensor_pm_per_V"], dtype=float)
        if d.shape != (3, 3, 3):
            raise ConfigError(f"{where}.d_tensor_pm_per_V: expected 3x3x3 nesting")
    return d


def _layer_from_entry(entry: dict, registry: MaterialRegistry, where: str) -> Layer:
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: expected a layer object")
    try:
        name = entry["material"]
        thickness = float(entry["thickness_nm"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if thickness <= 0:
        raise ConfigError(f"{where}.thickness_nm: must be > 0, got {thickness}")
    return Layer(registry.get(name), thickness, _tensor_from_entry(entry, where))


def load_stack(path, registry: MaterialRegistry) -> Stack:
    """Parse and validate a stack JSON file against a material registry."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")

    def ambient(key):
        name = doc.get(key)
        return VACUUM if name is None else registry.get(name)

    left, right = ambient("ambient_left"), ambient("ambient_right")
    z0 = float(doc.get("z0_nm", 0.0))

    if "periodic" in doc:
        spec = doc["periodic"]
        cell = [
            _layer_from_entry(e, registry, f"{path}: periodic.cell[{i}]")
            for i, e in enumerate(spec.get("cell", []))
        ]
        return build_periodic(
            cell,
            int(spec.get("repetitions", 1)),
            bool(spec.get("terminate_with_first", False)),
            left,
            right,
            z0,
        )
    entries = doc.get("layers")
    if not entries:
        raise ConfigError(f"{path}: layers array is missing or empty")
    layers = [
        _layer_from_entry(e, registry, f"{path}: layers[{i}]") for i, e in enumerate(entries)
    ]
    return Stack(left, tuple(layers), right, z0)


def serialize_stack(stack: Stack) -> dict:
    """Stack as a JSON-ready dict; load_stack of the result round-trips."""
    return {
        "ambient_left": stack.ambient_left.name,
        "ambient_right": stack.ambient_right.name,
        "z0_nm": stack.z0_nm,
        "layers": [
            {
                "material": l.material.name,
                "thickness_nm": l.thickness_nm,
                "d_tensor_pm_per_V": l.chi2_pm_per_v.tolist(),
            }
            for l in stack.layers
        ],
    }


def stack_hash(stack: Stack) -> str:
    """Short content hash used to tag outputs."""
    blob = json.dumps(serialize_stack(stack), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
