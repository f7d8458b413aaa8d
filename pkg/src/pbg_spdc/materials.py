"""Refractive-index models for layer media.

Three dispersion kinds are supported: a constant index, a Sellmeier
expansion n^2 = A + sum_k B_k L^2 / (L^2 - C_k) with L the vacuum
wavelength in micrometers and C_k in um^2, and a tabulated set of
(wavelength, index) samples interpolated linearly.  Indices are real
(lossless media) and must stay >= 1 over the declared validity window;
queries outside the window are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DuplicateMaterialError,
    MaterialRangeError,
    UnknownMaterialError,
)

_KINDS = ("constant", "sellmeier", "tabulated")


@dataclass(frozen=True, eq=False)
class DispersionModel:
    kind: str
    valid_range_nm: tuple[float, float]
    constant_index: float | None = None
    sellmeier_offset: float = 1.0
    #: (B_k, C_k) pairs, C_k in um^2.
    sellmeier_terms: tuple[tuple[float, float], ...] = ()
    table_wavelength_nm: np.ndarray | None = None
    table_index: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown dispersion kind {self.kind!r}")
        lo, hi = self.valid_range_nm
        if not (0 < lo < hi):
            raise ConfigError(f"invalid valid_range_nm ({lo}, {hi})")
        if self.kind == "constant" and (
            self.constant_index is None or self.constant_index < 1.0
        ):
            raise ConfigError("constant model requires an index >= 1")
        if self.kind == "tabulated":
            lam = np.asarray(self.table_wavelength_nm, dtype=float)
            n = np.asarray(self.table_index, dtype=float)
            if lam.ndim != 1 or lam.shape != n.shape or lam.size < 2:
                raise ConfigError("tabulated model needs matching 1-d arrays")
            if not np.all(np.diff(lam) > 0):
                raise ConfigError("table wavelengths must be strictly increasing")
            object.__setattr__(self, "table_wavelength_nm", lam)
            object.__setattr__(self, "table_index", n)

    def evaluate(self, wavelength_nm):
        """Index at the given vacuum wavelength(s); no range checking."""
        lam = np.asarray(wavelength_nm, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(float(self.constant_index), lam.shape).copy()
        if self.kind == "sellmeier":
            l2 = (lam / 1000.0) ** 2
            n2 = np.full(lam.shape, self.sellmeier_offset, dtype=float)
            for b, c in self.sellmeier_terms:
                n2 += b * l2 / (l2 - c)
            return np.sqrt(n2)
        return np.interp(lam, self.table_wavelength_nm, self.table_index)


@dataclass(frozen=True, eq=False)
class MaterialRecord:
    name: str
    dispersion: DispersionModel


@dataclass
class MaterialRegistry:
    records: dict[str, MaterialRecord] = field(default_factory=dict)

    def add(self, record: MaterialRecord):
        if record.name in self.records:
            raise DuplicateMaterialError(f"duplicate material name {record.name!r}")
        self.records[record.name] = record

    def get(self, name: str) -> MaterialRecord:
        try:
            return self.records[name]
        except KeyError:
            raise UnknownMaterialError(f"unknown material {name!r}") from None

    def __len__(self):
        return len(self.records)

    def __contains__(self, name):
        return name in self.records


#: Ambient default when a stack file omits its surrounding media.
VACUUM = MaterialRecord(
    "vacuum",
    DispersionModel(kind="constant", valid_range_nm=(1.0, 1e9), constant_index=1.0),
)


def refractive_index(material: MaterialRecord, wavelength_nm):
    """Real index n(lambda) of a material, rejecting out-of-range queries."""
    lam = np.asarray(wavelength_nm, dtype=float)
    lo, hi = material.dispersion.valid_range_nm
    if np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi)].flat[0]
        raise MaterialRangeError(
            f"wavelength {bad:.6g} nm outside validity window "
            f"[{lo:g}, {hi:g}] nm of material {material.name!r}"
        )
    n = material.dispersion.evaluate(lam)
    return float(n) if np.isscalar(wavelength_nm) else n


def _model_from_entry(entry: dict, where: str) -> DispersionModel:
    try:
        kind = entry["model"]
        rng = entry["valid_range_nm"]
        params = entry.get("parameters", {})
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{where}: missing field {exc}") from None
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ConfigError(f"{where}.valid_range_nm: expected [lo, hi]")
    lo, hi = float(rng[0]), float(rng[1])
    if kind == "constant":
        if "index" not in params:
            raise ConfigError(f"{where}.parameters.index: missing")
        return DispersionModel(
            kind="constant", valid_range_nm=(lo, hi), constant_index=float(params["index"])
        )
    if kind == "sellmeier":
        terms = params.get("terms")
        if not terms:
            raise ConfigError(f"{where}.parameters.terms: missing or empty")
        pairs = []
        for k, term in enumerate(terms):
            if len(term) != 2:
                raise ConfigError(f"{where}.parameters.terms[{k}]: expected [B, C_um2]")
            pairs.append((float(term[0]), float(term[1])))
        return DispersionModel(
            kind="sellmeier",
            valid_range_nm=(lo, hi),
            sellmeier_offset=float(params.get("offset", 1.0)),
            sellmeier_terms=tuple(pairs),
        )
    if kind == "tabulated":
        lam = params.get("wavelength_nm")
        n = params.get("index")
        if lam is None or n is None:
            raise ConfigError(f"{where}.parameters: needs wavelength_nm and index arrays")
        return DispersionModel(
            kind="tabulated",
            valid_range_nm=(lo, hi),
            table_wavelength_nm=np.asarray(lam, dtype=float),
            table_index=np.asarray(n, dtype=float),
        )
    raise ConfigError(f"{where}.model: unknown kind {kind!r}")


def _check_physical(record: MaterialRecord, samples: int = 257):
    """Reject models that dip below n = 1 inside their validity window."""
    lo, hi = record.dispersion.valid_range_nm
    lam = np.linspace(lo, min(hi, 1e7), samples)
    n = record.dispersion.evaluate(lam)
    if not np.all(np.isfinite(n)) or np.any(n < 1.0):
        raise ConfigError(
            f"material {record.name!r}: index not real and >= 1 over its validity window"
        )


def load_materials(path) -> MaterialRegistry:
    """Parse a materials JSON file into a registry of named records."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, list):
        raise ConfigError(f"{path}: top level must be an array of material objects")
    registry = MaterialRegistry()
    for i, entry in enumerate(doc):
        where = f"{path}: materials[{i}]"
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError(f"{where}: expected an object with a name")
        record = MaterialRecord(str(entry["name"]), _model_from_entry(entry, where))
        _check_physical(record)
        registry.add(record)
    return registry
