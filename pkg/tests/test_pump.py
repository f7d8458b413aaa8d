import numpy as np
import pytest
from hypothesis import given, strategies as st

from pbg_spdc.constants import angular_frequency
from pbg_spdc.errors import ConfigError, PumpModelError
from pbg_spdc.pump import PumpSpec, pump_polarization_split, pump_spectrum


def test_peak_value_unchirped():
    spec = PumpSpec.gaussian(660.0, tau_fs=150.0, amplitude=2.0)
    peak = pump_spectrum(spec, spec.omega0)
    assert peak == pytest.approx(2.0 * 150.0 / np.sqrt(2.0), rel=1e-12)
    assert peak.imag == pytest.approx(0.0, abs=1e-12)


def test_spectral_widths():
    """Amplitude FWHM is 4 sqrt(ln 2)/tau; intensity FWHM is 2 sqrt(2 ln 2)/tau."""
    tau = 200.0
    spec = PumpSpec.gaussian(660.0, tau_fs=tau)
    w0 = spec.omega0
    omega = np.linspace(w0 - 0.06, w0 + 0.06, 40001)
    amplitude = np.abs(pump_spectrum(spec, omega))

    def width(y):
        half = y.max() / 2.0
        above = np.nonzero(y >= half)[0]
        return omega[above[-1]] - omega[above[0]]

    assert width(amplitude) == pytest.approx(4.0 * np.sqrt(np.log(2.0)) / tau, rel=1e-3)
    assert 4.0 * np.sqrt(np.log(2.0)) / tau == pytest.approx(0.016651, rel=1e-4)
    assert width(amplitude**2) == pytest.approx(2.0 * np.sqrt(2.0 * np.log(2.0)) / tau, rel=1e-3)


def test_chirp_broadens_intensity_spectrum():
    tau, chirp = 120.0, 1.7
    plain = PumpSpec.gaussian(660.0, tau_fs=tau)
    chirped = PumpSpec.gaussian(660.0, tau_fs=tau, chirp=chirp)
    w0 = plain.omega0
    omega = np.linspace(w0 - 0.2, w0 + 0.2, 80001)

    def width(spec):
        y = np.abs(pump_spectrum(spec, omega)) ** 2
        half = y.max() / 2.0
        above = np.nonzero(y >= half)[0]
        return omega[above[-1]] - omega[above[0]]

    assert width(chirped) / width(plain) == pytest.approx(np.sqrt(1 + chirp**2), rel=1e-3)


@given(st.floats(min_value=20.0, max_value=500.0), st.floats(min_value=-3.0, max_value=3.0))
def test_parseval(tau, chirp):
    """Frequency-integrated |spectrum|^2 equals the time-domain energy
    xi^2 tau sqrt(pi/2), independent of chirp (Plancherel)."""
    spec = PumpSpec.gaussian(700.0, tau_fs=tau, chirp=chirp, amplitude=1.3)
    w0 = spec.omega0
    half_span = 40.0 * np.sqrt(1 + chirp**2) / tau
    omega = np.linspace(w0 - half_span, w0 + half_span, 20001)
    integral = np.trapezoid(np.abs(pump_spectrum(spec, omega)) ** 2, omega)
    expected = 1.3**2 * tau * np.sqrt(np.pi / 2.0)
    assert integral == pytest.approx(expected, rel=1e-8)


def test_time_domain_round_trip():
    """Inverse transform of the spectrum reproduces the pulse envelope."""
    tau, chirp, w0_lam = 90.0, 0.8, 660.0
    spec = PumpSpec.gaussian(w0_lam, tau_fs=tau, chirp=chirp, amplitude=0.7)
    w0 = spec.omega0
    omega = np.linspace(w0 - 0.6, w0 + 0.6, 2**14)
    a = pump_spectrum(spec, omega)
    t = np.linspace(-4 * tau, 4 * tau, 257)
    # unitary convention: E(t) = (1/sqrt(2 pi)) int dw A(w) e^{-i w t}
    kernel = np.exp(-1j * np.outer(t, omega))
    field = kernel @ a * (omega[1] - omega[0]) / np.sqrt(2.0 * np.pi)
    expected = 0.7 * np.exp(-(1 + 1j * chirp) * t**2 / tau**2) * np.exp(-1j * w0 * t)
    assert np.allclose(field, expected, atol=1e-8 * abs(expected).max())


def test_cw_spectrum_refused():
    spec = PumpSpec.cw(660.0)
    with pytest.raises(PumpModelError) as err:
        pump_spectrum(spec, spec.omega0)
    assert "cw" in str(err.value)


def test_polarization_split():
    assert pump_polarization_split(PumpSpec.cw(660.0, phi_p=0.0)) == (1.0, 0.0)
    te, tm = pump_polarization_split(PumpSpec.cw(660.0, phi_p=np.pi / 2))
    assert te == pytest.approx(0.0, abs=1e-12) and tm == pytest.approx(1.0)
    te, tm = pump_polarization_split(PumpSpec.cw(660.0, phi_p=np.pi / 4))
    assert te == pytest.approx(np.sqrt(0.5)) and tm == pytest.approx(np.sqrt(0.5))
    assert te**2 + tm**2 == pytest.approx(1.0, abs=1e-15)


def test_invalid_specs_rejected():
    with pytest.raises(ConfigError):
        PumpSpec(kind="gaussian", omega0=angular_frequency(660.0))  # no tau
    with pytest.raises(ConfigError):
        PumpSpec(kind="square", omega0=2.0)
    with pytest.raises(ConfigError):
        PumpSpec.cw(660.0, amplitude=-1.0)
