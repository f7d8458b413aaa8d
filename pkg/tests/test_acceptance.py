"""End-to-end acceptance checks for the bundled 49-layer GaN/AlN example.

Each criterion prints one PASS/FAIL line (run with `pytest -s` to see them
alongside the assertions).  Tolerances acknowledge that the dispersion
dataset behind the published design is not uniquely fixed.
"""

import json
import os
import shutil

import numpy as np
import pytest

from pbg_spdc.cli import main as cli_main
from pbg_spdc.constants import C_NM_FS, angular_frequency
from pbg_spdc.materials import VACUUM
from pbg_spdc.observables import (
    energy_spectrum,
    fwhm,
    hom_scan,
    photon_flux,
    reference_jsa,
    relative_efficiency,
    time_domain_tpa,
)
from pbg_spdc.propagation import (
    TE,
    TM,
    band_edge_resonance,
    boundary_matrix,
    snell_chain,
    transmittance_reflectance,
)
from pbg_spdc.pump import PumpSpec, pump_spectrum
from pbg_spdc.spdc import (
    CHANNELS,
    EmissionGeometry,
    FrequencyGrid,
    JsaGrid,
    PumpFieldCache,
    jsa,
    jsa_cw,
    _prefactor,
)
from pbg_spdc.structure import Layer, Stack

from conftest import CONFIG_DIR, constant_material, te_tensor


def report(criterion, ok, detail):
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def resonance_nm(bundled_stack):
    return band_edge_resonance(bundled_stack)


@pytest.fixture(scope="module")
def cw_setup(bundled_stack, resonance_nm):
    pump = PumpSpec.cw(resonance_nm)
    w_deg = pump.omega0 / 2.0
    grid = FrequencyGrid(w_deg * 0.70, w_deg * 1.30, 2049)
    cache = PumpFieldCache(bundled_stack, pump.theta_p)
    return pump, w_deg, grid, cache


@pytest.fixture(scope="module")
def degenerate_sweep(bundled_stack, cw_setup):
    """S^FF at the degenerate frequency over theta_s in [5, 60] deg."""
    pump, w_deg, _, cache = cw_setup
    thetas = np.arange(5.0, 60.0 + 1e-9, 0.25)
    point = FrequencyGrid(w_deg, w_deg, 1)
    values = np.empty_like(thetas)
    for i, theta in enumerate(thetas):
        g = jsa_cw(bundled_stack, pump, EmissionGeometry(np.radians(theta)), point, cache)
        values[i] = w_deg * abs(g.channels["FF"][0]) ** 2
    return thetas, values


def local_maxima(x, y, floor=0.0):
    idx = [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]
           and y[i] > floor]
    return [x[i] for i in idx]


@pytest.fixture(scope="module")
def theta_optimum(degenerate_sweep):
    thetas, values = degenerate_sweep
    return float(thetas[int(np.argmax(values))])


def test_criterion_1_band_edge_resonance(resonance_nm):
    detail = f"first long-wavelength resonance at {resonance_nm:.2f} nm (design 664.5 +- 15)"
    report(1, abs(resonance_nm - 664.5) <= 15.0, detail)


def test_criterion_2_degenerate_emission_optimum(degenerate_sweep, theta_optimum):
    thetas, values = degenerate_sweep
    maxima = local_maxima(thetas, values, floor=2e-3 * values.max())
    second = [t for t in maxima if 32.0 <= t <= 38.0]
    third = [t for t in maxima if 52.0 <= t <= 58.0]
    ok = abs(theta_optimum - 13.8) <= 2.0 and bool(second) and bool(third)
    detail = (f"global maximum at {theta_optimum:.2f} deg (13.8 +- 2); "
              f"secondary maxima near {second and second[0]:.2f} and {third and third[0]:.2f} deg")
    report(2, ok, detail)


def test_criterion_3_spectral_widths(bundled_stack, cw_setup, degenerate_sweep):
    pump, w_deg, grid, cache = cw_setup
    thetas, values = degenerate_sweep
    maxima = local_maxima(thetas, values, floor=2e-3 * values.max())
    constructive = [maxima[0] if maxima else None,
                    next(t for t in maxima if 32.0 <= t <= 38.0),
                    next(t for t in maxima if 52.0 <= t <= 58.0)]
    constructive[0] = float(thetas[int(np.argmax(values))])
    widths = []
    for theta in constructive:
        g = jsa_cw(bundled_stack, pump, EmissionGeometry(np.radians(theta)), grid, cache)
        widths.append(energy_spectrum(g).stats("FF").fwhm_lambda_nm)
    in_band = all(8.0 <= w <= 18.0 for w in widths)

    active = 0.0
    for theta in np.arange(5.0, 60.0 + 1e-9, 1.0):
        g = jsa_cw(bundled_stack, pump, EmissionGeometry(np.radians(theta)), grid, cache)
        active = max(active, energy_spectrum(g).stats("FF").fwhm_lambda_nm)
    ok = in_band and active >= 60.0
    detail = (f"degenerate-peak widths {['%.1f' % w for w in widths]} nm (in [8, 18]); "
              f"max active width {active:.1f} nm (>= 60)")
    report(3, ok, detail)


def count_oscillation_minima(rn, ceiling=0.9):
    return sum(
        1 for i in range(1, len(rn) - 1)
        if rn[i] < rn[i - 1] and rn[i] <= rn[i + 1] and rn[i] < ceiling
    )


def test_criterion_4_hom(bundled_stack, cw_setup, theta_optimum):
    pump, w_deg, grid, cache = cw_setup
    tau = np.linspace(-600.0, 600.0, 1201)
    g_opt = jsa_cw(bundled_stack, pump, EmissionGeometry(np.radians(theta_optimum)), grid, cache)
    scan = hom_scan(g_opt, tau)
    rn = scan.rn["FF"]
    dip_min = float(rn.min())
    width = scan.dip_fwhm["FF"]
    g_broad = jsa_cw(bundled_stack, pump, EmissionGeometry(np.radians(28.0)), grid, cache)
    rn_broad = hom_scan(g_broad, tau).rn["FF"]
    n_min = count_oscillation_minima(rn_broad)
    ok = dip_min <= 0.05 and 120.0 <= width <= 280.0 and n_min >= 2
    detail = (f"dip minimum {dip_min:.4f} (<= 0.05), visibility {scan.visibility['FF']:.3f}, "
              f"dip FWHM {width:.0f} fs (in [120, 280]); {n_min} oscillation minima at 28 deg (>= 2)")
    report(4, ok, detail)


def test_criterion_5_efficiency(bundled_stack, slab_stack, cw_setup, theta_optimum):
    pump, w_deg, grid, cache = cw_setup
    ref = reference_jsa(bundled_stack, pump, grid)

    def eta_cw_at(stack, theta, this_cache, this_ref):
        g = jsa_cw(stack, pump, EmissionGeometry(np.radians(theta)), grid, this_cache)
        return relative_efficiency(g, this_ref).at(w_deg)["total"]

    best = (0.0, theta_optimum)
    for theta in np.arange(theta_optimum - 0.4, theta_optimum + 0.4 + 1e-9, 0.05):
        best = max(best, (eta_cw_at(bundled_stack, theta, cache, ref), theta))
    eta_cw, theta_eta = best

    pump_pulsed = PumpSpec.gaussian(
        2.0 * np.pi * C_NM_FS / pump.omega0, tau_fs=200.0
    )
    row = FrequencyGrid(w_deg, w_deg, 1)
    idler_grid = FrequencyGrid(w_deg * 0.94, w_deg * 1.06, 1025)
    g_pulsed = jsa(bundled_stack, pump_pulsed, EmissionGeometry(np.radians(theta_eta)),
                   row, idler_grid)
    ref_pulsed = reference_jsa(bundled_stack, pump_pulsed, row, idler_grid)
    eta_pulsed = relative_efficiency(g_pulsed, ref_pulsed).at(w_deg)["total"]

    slab_cache = PumpFieldCache(slab_stack, pump.theta_p)
    slab_ref = reference_jsa(slab_stack, pump, grid)
    slab_values = [eta_cw_at(slab_stack, theta, slab_cache, slab_ref)
                   for theta in np.arange(0.0, 20.0, 0.1)]
    eta_slab = max(slab_values)
    ratio = eta_cw / eta_slab

    ok = (
        8.75 <= eta_cw <= 16.25
        and 6.3 <= eta_pulsed <= 11.7
        and eta_slab <= 0.15
        and ratio >= 100.0
    )
    detail = (f"cw eta {eta_cw:.2f} (12.5 +- 30%), pulsed eta {eta_pulsed:.2f} (9 +- 30%), "
              f"slab eta {eta_slab:.3f} (<= 0.15), enhancement ratio {ratio:.1f} (>= 100)")
    report(5, ok, detail)


def test_criterion_6_pulsed_time_domain(bundled_stack, resonance_nm, theta_optimum):
    pump = PumpSpec.gaussian(resonance_nm, tau_fs=200.0)
    w_deg = pump.omega0 / 2.0
    grid = FrequencyGrid(w_deg * 0.925, w_deg * 1.075, 321)
    tau = np.linspace(-400.0, 1000.0, 1401)
    delays, widths = [], []
    for theta in (6.0, theta_optimum, 28.0, 45.0, 57.0):
        g = jsa(bundled_stack, pump, EmissionGeometry(np.radians(theta)), grid)
        flux = photon_flux(g, tau)
        y = flux.channels["FF"]
        delays.append(float(tau[int(np.argmax(y))]))
        widths.append(fwhm(tau, y))
    ok = all(50.0 <= d <= 220.0 for d in delays) and all(250.0 <= w <= 340.0 for w in widths)
    detail = (f"delays {['%.0f' % d for d in delays]} fs (in [50, 220]); "
              f"pulse FWHMs {['%.0f' % w for w in widths]} fs (in [250, 340])")
    report(6, ok, detail)


def test_criterion_7_property_suite(tmp_path):
    checks = []

    # Fresnel single-interface equivalence (1e-10)
    stack = Stack(VACUUM, (Layer(constant_material("g", 2.0), 1.0, np.zeros((3, 3, 3))),),
                  constant_material("g", 2.0))
    angles = snell_chain(stack, 2.0, 0.0)
    t0 = boundary_matrix(0, TE, angles, stack)
    det = t0[0, 0] * t0[1, 1] - t0[0, 1] * t0[1, 0]
    checks.append((
        "fresnel",
        abs(det / t0[1, 1] - 2.0 / 3.0) < 1e-10 and abs(-t0[1, 0] / t0[1, 1] + 1.0 / 3.0) < 1e-10,
    ))

    # Fabry-Perot slab oracle (1e-8)
    n0, n1, n2, thick, theta0 = 1.0, 2.1, 1.45, 430.0, 0.35
    fp = Stack(VACUUM, (Layer(constant_material("s", n1), thick, np.zeros((3, 3, 3))),),
               constant_material("r", n2))
    lam = np.linspace(500.0, 1500.0, 201)
    omega = angular_frequency(lam)
    t_pow, _ = transmittance_reflectance(fp, omega, theta0, TE)
    c0 = np.cos(theta0)
    c1 = np.sqrt(1 - (np.sin(theta0) / n1) ** 2 + 0j)
    c2 = np.sqrt(1 - (np.sin(theta0) / n2) ** 2 + 0j)
    r01 = (n0 * c0 - n1 * c1) / (n0 * c0 + n1 * c1)
    r12 = (n1 * c1 - n2 * c2) / (n1 * c1 + n2 * c2)
    t01 = 2 * n0 * c0 / (n0 * c0 + n1 * c1)
    t12 = 2 * n1 * c1 / (n1 * c1 + n2 * c2)
    delta = n1 * omega / C_NM_FS * c1 * thick
    t_airy = t01 * t12 * np.exp(1j * delta) / (1 + r01 * r12 * np.exp(2j * delta))
    t_pow_airy = np.abs(t_airy) ** 2 * (n2 * c2.real) / (n0 * c0)
    checks.append(("fabry-perot", bool(np.allclose(t_pow, t_pow_airy, atol=1e-8))))

    # flux conservation for lossless stacks (1e-10)
    entries = [(1.7, 133.0), (2.6, 81.0), (1.2, 260.0), (3.0, 44.0)]
    lossless = Stack(VACUUM,
                     tuple(Layer(constant_material(f"m{i}", n), t, np.zeros((3, 3, 3)))
                           for i, (n, t) in enumerate(entries)),
                     constant_material("out", 1.4))
    ok_flux = True
    for pol in (TE, TM):
        for theta in (0.0, 0.4, 1.1):
            t_pow, r_pow = transmittance_reflectance(lossless, 2.7, theta, pol)
            ok_flux &= abs(t_pow + r_pow - 1.0) < 1e-10
    checks.append(("flux-conservation", ok_flux))

    # single-slab closed-form amplitude oracle (1e-8)
    index, d_eff, length = 1.6, 7.0, 900.0
    mat = constant_material("m", index)
    slab = Stack(mat, (Layer(mat, length, te_tensor(d_eff)),), mat)
    pump = PumpSpec.gaussian(650.0, tau_fs=60.0)
    w0 = pump.omega0
    grid = FrequencyGrid(w0 * 0.47, w0 * 0.53, 5)
    g = jsa(slab, pump, EmissionGeometry(0.0), grid)
    kz = index / C_NM_FS
    ok_slab = True
    signs = {"F": 1.0, "B": -1.0}
    for j, ws in enumerate(g.omega_s):
        for k, wi in enumerate(g.omega_i):
            wp = ws + wi
            for ch, (ds, di) in zip(CHANNELS, (("F", "F"), ("F", "B"), ("B", "F"), ("B", "B"))):
                dk = kz * (wp - signs[ds] * ws - signs[di] * wi)
                x = 0.5 * dk * length
                exit_phase = np.exp(1j * kz * ws * length) if ds == "F" else 1.0
                exit_phase *= np.exp(1j * kz * wi * length) if di == "F" else 1.0
                expected = (_prefactor(ws, wi) * d_eff * pump_spectrum(pump, wp) * length
                            * np.exp(1j * x) * np.sinc(x / np.pi) * exit_phase)
                got = g.channels[ch][j, k]
                ok_slab &= abs(got - expected) <= 1e-8 * abs(expected)
    checks.append(("single-slab-jsa", ok_slab))

    # fast transform vs direct DFT on 32x32 (1e-10)
    center = 2.0
    w32 = np.linspace(center * 0.98, center * 1.02, 32)
    ds32 = w32[:, None] - center
    di32 = w32[None, :] - center
    sheet = np.exp(-(ds32**2 + di32**2) / (2 * (0.004 * center) ** 2)).astype(complex)
    sheet *= np.exp(1j * 37.0 * ds32)
    syn = JsaGrid(w32, w32, {ch: sheet for ch in CHANNELS},
                  PumpSpec.gaussian(660.0, tau_fs=100.0), EmissionGeometry(0.0), {})
    tpa = time_domain_tpa(syn, pad_factor=2.0, normalize=False)
    weight = np.sqrt(np.outer(w32, w32)) / w32.mean()
    step = w32[1] - w32[0]
    direct = np.empty((tpa.tau_s.size, tpa.tau_i.size), dtype=complex)
    for a, ts in enumerate(tpa.tau_s):
        row = (weight * sheet) * np.exp(-1j * w32 * ts)[:, None]
        direct[a] = step * step / (2 * np.pi) * (
            np.exp(-1j * np.outer(tpa.tau_i, w32)) @ row.sum(axis=0)
        )
    scale = np.abs(direct).max()
    checks.append(("fft-vs-dft", bool(np.allclose(tpa.channels["FF"], direct,
                                                  atol=1e-10 * scale))))

    # HOM time-domain vs frequency-domain on 32x32 (1e-6)
    tpa_plain = time_domain_tpa(syn, pad_factor=1.0, normalize=False)
    carrier = np.exp(1j * w32[0] * tpa_plain.tau_s)
    a32 = tpa_plain.channels["FF"] * carrier[:, None] * carrier[None, :]
    r0 = np.sum(np.abs(a32) ** 2)
    dt = tpa_plain.tau_s[1] - tpa_plain.tau_s[0]
    steps = np.arange(-6, 7)
    rho_time = [np.sum(np.roll(a32, m, axis=1) * np.conj(np.roll(a32, m, axis=1).T)).real / r0
                for m in steps]
    scan = hom_scan(syn, steps * dt)
    checks.append(("hom-time-vs-frequency",
                   bool(np.allclose(1.0 - np.asarray(rho_time), scan.rn["FF"], atol=1e-6))))

    # R_n(0) = 0 for a symmetric real joint amplitude (1e-6)
    real_sheet = np.exp(-(ds32**2 + di32**2) / (2 * (0.004 * center) ** 2)).astype(complex)
    symmetric = JsaGrid(w32, w32, {ch: real_sheet for ch in CHANNELS},
                        PumpSpec.gaussian(660.0, tau_fs=100.0), EmissionGeometry(0.0), {})
    scan0 = hom_scan(symmetric, np.array([0.0]))
    checks.append(("hom-symmetric-zero", abs(scan0.rn["FF"][0]) < 1e-6))

    # eta = 1 identity case (1e-10)
    ident = Stack(VACUUM, (Layer(VACUUM, 1200.0, te_tensor(5.0)),), VACUUM)
    pump_i = PumpSpec.gaussian(660.0, tau_fs=150.0)
    grid_i = FrequencyGrid(pump_i.omega0 * 0.48, pump_i.omega0 * 0.52, 9)
    g_i = jsa(ident, pump_i, EmissionGeometry(0.0), grid_i)
    ref_i = reference_jsa(ident, pump_i, grid_i, weight_mode="sqrt-omega-i")
    eta_ff = relative_efficiency(g_i, ref_i).eta["FF"]
    checks.append(("eta-identity", bool(np.allclose(eta_ff, 1.0, atol=1e-10))))

    # all-linear stack emits nothing (exact zero)
    linear = Stack(VACUUM, (Layer(constant_material("a", 2.0), 117.0, np.zeros((3, 3, 3))),),
                   VACUUM)
    g_lin = jsa(linear, pump_i, EmissionGeometry(0.1), grid_i)
    checks.append(("all-linear-zero", not any(g_lin.channels[ch].any() for ch in CHANNELS)))

    # determinism of parallel sweeps (byte-identical CSV)
    config = {
        "materials": os.path.join(CONFIG_DIR, "materials.json"),
        "stack": os.path.join(CONFIG_DIR, "stack_gan_aln_49.json"),
        "output_dir": str(tmp_path / "out"),
        "pump": {"kind": "cw", "wavelength_nm": 677.57},
        "geometry": {"theta_s_deg": {"start": 10.0, "stop": 16.0, "steps": 3}},
        "transmission": {"lambda_start_nm": 1320.0, "lambda_stop_nm": 1390.0, "points": 29},
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(config))
    assert cli_main(["transmission", str(cfg_path), "--workers", "1"]) == 0
    first = (tmp_path / "out" / "transmission.csv").read_bytes()
    shutil.rmtree(tmp_path / "out")
    assert cli_main(["transmission", str(cfg_path), "--workers", "2"]) == 0
    second = (tmp_path / "out" / "transmission.csv").read_bytes()
    checks.append(("sweep-determinism", first == second))

    ok = all(flag for _, flag in checks)
    detail = "; ".join(f"{name}={'ok' if flag else 'FAIL'}" for name, flag in checks)
    report(7, ok, detail)
