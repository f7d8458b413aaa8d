import os

import numpy as np
import pytest

from pbg_spdc.materials import DispersionModel, MaterialRecord, load_materials
from pbg_spdc.structure import Layer, Stack, load_stack

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(REPO_ROOT, "configs")


def constant_material(name: str, index: float) -> MaterialRecord:
    return MaterialRecord(
        name,
        DispersionModel(kind="constant", valid_range_nm=(1.0, 1e9), constant_index=index),
    )


def te_tensor(d_eff: float) -> np.ndarray:
    d = np.zeros((3, 3, 3))
    d[0, 0, 0] = d_eff
    return d


@pytest.fixture(scope="session")
def config_dir():
    return CONFIG_DIR


@pytest.fixture(scope="session")
def registry():
    return load_materials(os.path.join(CONFIG_DIR, "materials.json"))


@pytest.fixture(scope="session")
def bundled_stack(registry):
    return load_stack(os.path.join(CONFIG_DIR, "stack_gan_aln_49.json"), registry)


@pytest.fixture(scope="session")
def slab_stack(registry):
    return load_stack(os.path.join(CONFIG_DIR, "stack_gan_slab.json"), registry)


@pytest.fixture
def two_layer_stack():
    a = constant_material("hi", 1.9)
    b = constant_material("lo", 1.32)
    vac = constant_material("vac", 1.0)
    return Stack(vac, (Layer(a, 140.0, te_tensor(4.0)), Layer(b, 230.0, np.zeros((3, 3, 3)))), vac)
