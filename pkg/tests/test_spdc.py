import threading

import numpy as np
import pytest

from pbg_spdc.constants import C_NM_FS, angular_frequency
from pbg_spdc.errors import ConfigError, PumpModelError
from pbg_spdc.materials import VACUUM
from pbg_spdc.propagation import TE
from pbg_spdc.pump import PumpSpec, pump_spectrum
from pbg_spdc.spdc import (
    CHANNELS,
    EmissionGeometry,
    FrequencyGrid,
    PumpFieldCache,
    degenerate_grid,
    idler_angle,
    jsa,
    jsa_cw,
    jsa_point,
    layer_term,
    point_context,
    _prefactor,
)
from pbg_spdc.structure import Layer, Stack
from pbg_spdc.observables import total_pairs

from conftest import constant_material, te_tensor


def matched_slab(d_eff=7.0, index=1.6, thickness=900.0):
    """Single nonlinear slab with index-matched ambient: no reflections."""
    mat = constant_material("m", index)
    return Stack(mat, (Layer(mat, thickness, te_tensor(d_eff)),), mat), index, thickness


def linear_stack():
    a = constant_material("a", 2.0)
    b = constant_material("b", 1.4)
    return Stack(VACUUM, (Layer(a, 117.0, np.zeros((3, 3, 3))),
                          Layer(b, 180.0, np.zeros((3, 3, 3)))), VACUUM)


# -- idler angle ---------------------------------------------------------------

def test_idler_angle_degenerate_symmetry():
    w = 1.4
    theta_s = 0.3
    assert idler_angle(2 * w, w, w, 0.0, theta_s) == pytest.approx(-theta_s, rel=1e-12)


def test_idler_angle_collinear():
    assert idler_angle(2.8, 1.5, 1.3, 0.0, 0.0) == 0.0


def test_idler_angle_forbidden():
    # omega_s / omega_i = 3, sin(theta_s) = 0.5 -> argument -1.5
    assert idler_angle(4.0, 3.0, 1.0, 0.0, float(np.arcsin(0.5))) is None


def test_idler_angle_requires_positive_omega():
    with pytest.raises(ValueError):
        idler_angle(2.0, 1.0, -1.0, 0.0, 0.0)


# -- layer terms ---------------------------------------------------------------

def test_layer_term_zero_for_linear_layer():
    stack, _, _ = matched_slab(d_eff=0.0)
    pump = PumpSpec.gaussian(650.0, tau_fs=100.0)
    geom = EmissionGeometry(0.0)
    w = pump.omega0 / 2
    ctx = point_context(stack, pump, geom, w, w)
    assert layer_term(1, "F", "F", "F", TE, TE, TE, ctx) == 0.0


def test_layer_term_phase_matched_magnitude():
    """At dK = 0 the term magnitude is prefactor * d * |A| * L."""
    stack, index, thickness = matched_slab(d_eff=7.0)
    pump = PumpSpec.gaussian(650.0, tau_fs=100.0)
    geom = EmissionGeometry(0.0)
    w = pump.omega0 / 2
    ctx = point_context(stack, pump, geom, w, w)
    term = layer_term(1, "F", "F", "F", TE, TE, TE, ctx)
    # dispersionless collinear: dK = 0 exactly
    expected = abs(_prefactor(w, w)) * 7.0 * abs(pump_spectrum(pump, 2 * w)) * thickness
    assert abs(term) == pytest.approx(expected, rel=1e-12)


def test_layer_term_slab_closed_form():
    """Forward-direction term carries L sinc(dk L/2) e^{i dk L/2}."""
    stack, index, thickness = matched_slab()
    pump = PumpSpec.gaussian(650.0, tau_fs=100.0)
    geom = EmissionGeometry(0.0)
    ws = pump.omega0 * 0.52
    wi = pump.omega0 * 0.51
    ctx = point_context(stack, pump, geom, ws, wi)
    term = layer_term(1, "F", "F", "F", TE, TE, TE, ctx)
    kz = index / C_NM_FS
    dk = kz * (ws + wi) - kz * ws - kz * wi   # 0 for dispersionless
    assert dk == pytest.approx(0.0, abs=1e-15)
    # detuned mismatch via backward idler: dK = k_p - k_s + k_i
    term_b = layer_term(1, "F", "F", "B", TE, TE, TE, ctx)
    dkb = kz * (ws + wi) - kz * ws + kz * wi
    x = 0.5 * dkb * thickness
    expected = (
        _prefactor(ws, wi) * 7.0 * pump_spectrum(pump, ws + wi)
        * ctx.pump_fields[TE][1][0]
        / pump_spectrum(pump, ws + wi)
        * thickness * np.exp(1j * x) * np.sinc(x / np.pi)
    )
    assert term_b == pytest.approx(complex(expected), rel=1e-10)


# -- jsa assembly ---------------------------------------------------------------

def test_all_linear_stack_zero():
    stack = linear_stack()
    pump = PumpSpec.gaussian(660.0, tau_fs=120.0)
    grid = degenerate_grid(pump, 0.2, 16)
    g = jsa(stack, pump, EmissionGeometry(0.1), grid)
    for ch in CHANNELS:
        assert not g.channels[ch].any()

    cw = PumpSpec.cw(660.0)
    gc = jsa_cw(stack, cw, EmissionGeometry(0.1), degenerate_grid(cw, 0.2, 17))
    for ch in CHANNELS:
        assert not gc.channels[ch].any()


def test_linearity_in_d():
    base, _, _ = matched_slab(d_eff=3.0)
    doubled, _, _ = matched_slab(d_eff=6.0)
    pump = PumpSpec.gaussian(660.0, tau_fs=90.0)
    grid = degenerate_grid(pump, 0.1, 8)
    geom = EmissionGeometry(0.15)
    g1 = jsa(base, pump, geom, grid)
    g2 = jsa(doubled, pump, geom, grid)
    for ch in CHANNELS:
        assert np.allclose(g2.channels[ch], 2.0 * g1.channels[ch], rtol=1e-12)


def test_single_slab_analytic_oracle():
    """Index-matched slab JSA equals the closed-form expression pointwise."""
    stack, index, thickness = matched_slab(d_eff=7.0, index=1.6, thickness=900.0)
    pump = PumpSpec.gaussian(650.0, tau_fs=60.0)
    geom = EmissionGeometry(0.0)
    w0 = pump.omega0
    grid = FrequencyGrid(w0 * 0.46, w0 * 0.54, 9)
    g = jsa(stack, pump, geom, grid)
    kz = index / C_NM_FS

    signs = {"F": 1.0, "B": -1.0}
    for j, ws in enumerate(g.omega_s):
        for k, wi in enumerate(g.omega_i):
            wp = ws + wi
            spectrum = pump_spectrum(pump, wp)
            for ch, (ds, di) in zip(CHANNELS, (("F", "F"), ("F", "B"), ("B", "F"), ("B", "B"))):
                dk = kz * wp - signs[ds] * kz * ws - signs[di] * kz * wi
                x = 0.5 * dk * thickness
                exit_phase = 1.0
                if ds == "F":
                    exit_phase *= np.exp(1j * kz * ws * thickness)
                if di == "F":
                    exit_phase *= np.exp(1j * kz * wi * thickness)
                expected = (
                    _prefactor(ws, wi) * 7.0 * spectrum * thickness
                    * np.exp(1j * x) * np.sinc(x / np.pi) * exit_phase
                )
                got = g.channels[ch][j, k]
                assert got == pytest.approx(complex(expected), rel=1e-8), (ch, j, k)


def test_vectorized_matches_scalar_reference(two_layer_stack):
    pump = PumpSpec.gaussian(660.0, tau_fs=70.0, theta_p=0.04, phi_p=0.25)
    geom = EmissionGeometry(theta_s=0.2, phi_s=0.15, phi_i=-0.3)
    w0 = pump.omega0
    grid = FrequencyGrid(w0 * 0.47, w0 * 0.53, 3)
    g = jsa(two_layer_stack, pump, geom, grid)
    for j, ws in enumerate(g.omega_s):
        for k, wi in enumerate(g.omega_i):
            ref = jsa_point(two_layer_stack, pump, geom, float(ws), float(wi))
            for ch in CHANNELS:
                assert g.channels[ch][j, k] == pytest.approx(ref[ch], rel=1e-10, abs=1e-25)


def test_exchange_symmetry_collinear(bundled_stack):
    """theta_p = theta_s = 0, equal analyzers: swapping the pair frequencies
    mirrors the amplitude exactly."""
    pump = PumpSpec.gaussian(677.5, tau_fs=150.0)
    w = pump.omega0 / 2
    delta = 0.04 * w
    grid_s = FrequencyGrid(w - delta, w + delta, 2)
    g = jsa(bundled_stack, pump, EmissionGeometry(0.0), grid_s)
    a = g.channels["FF"][0, 1]
    b = g.channels["FF"][1, 0]
    assert abs(a) == pytest.approx(abs(b), rel=1e-8)
    assert g.channels["BB"][0, 1] == pytest.approx(g.channels["BB"][1, 0], rel=1e-8)


def test_forbidden_region_zero_and_edge_behavior():
    """Forbidden idler points are exactly zero; the right-exit channels
    vanish continuously toward the grazing boundary (no fixed-size jump:
    the last allowed sample shrinks as the grid refines)."""
    stack, index, thickness = matched_slab(index=2.0)
    vacuum_stack = Stack(VACUUM, stack.layers, VACUUM)
    pump = PumpSpec.cw(650.0)
    w0 = pump.omega0
    theta_s = float(np.arcsin(0.82))

    def boundary_profile(points):
        grid = FrequencyGrid(w0 * 0.42, w0 * 0.62, points)
        g = jsa_cw(vacuum_stack, pump, EmissionGeometry(theta_s), grid)
        arg = -(g.omega_s * np.sin(theta_s)) / g.omega_i
        forbidden = np.abs(arg) > 1.0 - 1e-12
        assert forbidden.any() and (~forbidden).any()
        assert g.metadata["forbidden_points"] == int(forbidden.sum())
        for ch in CHANNELS:
            assert not g.channels[ch][forbidden].any()
            assert np.isfinite(g.channels[ch]).all()
        inside = np.nonzero(~forbidden)[0]
        near = inside[np.argsort(np.abs(np.abs(arg[inside]) - 1.0))[:4]]
        near = near[np.argsort(np.abs(arg[near]))]          # ordered toward the edge
        ff = np.abs(g.channels["FF"])
        return ff[near] / ff.max()

    coarse = boundary_profile(801)
    fine = boundary_profile(3201)
    # monotone decay toward the boundary, already small there
    assert np.all(np.diff(coarse) < 0)
    assert coarse[-1] < 0.1
    # refining the grid shrinks the last allowed sample (continuous -> 0)
    assert fine[-1] < 0.6 * coarse[-1]


def test_jsa_rejects_wrong_pump_kind(bundled_stack):
    cw = PumpSpec.cw(660.0)
    with pytest.raises(PumpModelError):
        jsa(bundled_stack, cw, EmissionGeometry(0.1), degenerate_grid(cw, 0.2, 4))
    pulsed = PumpSpec.gaussian(660.0, tau_fs=100.0)
    with pytest.raises(PumpModelError):
        jsa_cw(bundled_stack, pulsed, EmissionGeometry(0.1), degenerate_grid(pulsed, 0.2, 4))


def test_cw_grid_must_stay_below_pump(bundled_stack):
    cw = PumpSpec.cw(660.0)
    bad = FrequencyGrid(cw.omega0 * 0.5, cw.omega0 * 1.1, 8)
    with pytest.raises(ConfigError):
        jsa_cw(bundled_stack, cw, EmissionGeometry(0.1), bad)


def test_cw_amplitude_scaling(bundled_stack):
    geom = EmissionGeometry(np.radians(14.0))
    grid = FrequencyGrid(angular_frequency(677.5) / 2 * 0.98,
                         angular_frequency(677.5) / 2 * 1.02, 5)
    weak = jsa_cw(bundled_stack, PumpSpec.cw(677.5, amplitude=1.0), geom, grid)
    strong = jsa_cw(bundled_stack, PumpSpec.cw(677.5, amplitude=3.0), geom, grid)
    for ch in CHANNELS:
        assert np.allclose(np.abs(strong.channels[ch]) ** 2,
                           9.0 * np.abs(weak.channels[ch]) ** 2, rtol=1e-10)


def test_channel_sum_grid_convergence(bundled_stack):
    """Total pair number moves by < 0.5% when the grid resolution doubles."""
    pump = PumpSpec.gaussian(677.57, tau_fs=200.0)
    geom = EmissionGeometry(np.radians(13.5))
    w = pump.omega0 / 2
    totals = []
    for points in (96, 192):
        grid = FrequencyGrid(w * 0.94, w * 1.06, points)
        g = jsa(bundled_stack, pump, geom, grid)
        totals.append(sum(total_pairs(g).values()))
    assert abs(totals[1] - totals[0]) / totals[1] < 0.005


def test_jsa_grid_validation(bundled_stack):
    pump = PumpSpec.gaussian(677.57, tau_fs=200.0)
    w = pump.omega0 / 2
    g = jsa(bundled_stack, pump, EmissionGeometry(np.radians(13.5)),
            FrequencyGrid(w * 0.9, w * 1.1, 48))
    g.validate()  # wide grid: edge amplitudes decayed
    narrow = jsa(bundled_stack, pump, EmissionGeometry(np.radians(13.5)),
                 FrequencyGrid(w * 0.999, w * 1.001, 16))
    with pytest.raises(ValueError):
        narrow.validate()


def test_pump_cache_concurrent_readers(bundled_stack):
    cache = PumpFieldCache(bundled_stack, 0.0)
    omega = angular_frequency(677.5)
    results = []

    def reader():
        sol, amps, bad = cache.solution(omega, TE)
        results.append(amps)

    threads = [threading.Thread(target=reader) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(results) == 8
    for amps in results[1:]:
        assert np.array_equal(amps, results[0])
    assert len(cache._data) == 1
