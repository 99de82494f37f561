import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from dwindex.config import n2_config
from dwindex.dirac import HermitianOperator
from dwindex.gauge import smear
from dwindex.pipeline import wall_gauge
from dwindex.spectral import (
    Spectrum,
    SpectralError,
    circle_eta,
    eigensolve,
    eta_regularized,
    index_heat_trace,
    spectral_flow,
)
from dwindex.wall import assemble_wall_family

L = 2 * np.pi


def circle_spectrum(x, K=400):
    return np.arange(-K, K + 1) + x


def test_heat_trace_counts_unpaired_modes():
    lam = np.array([0.0, 0.0, 1.0, 1.0, 2.5, 2.5, 0.0])
    chir = np.array([1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0])
    ht = index_heat_trace(Spectrum(lam, chir), [0.1, 1.0, 10.0])
    assert ht.index == 1
    assert ht.deviation < 1e-15
    with pytest.raises(SpectralError):
        index_heat_trace(Spectrum(lam, chir), [0.0])
    with pytest.raises(SpectralError):
        index_heat_trace(Spectrum(lam), [1.0])


@given(st.floats(0.02, 0.98))
def test_regularized_eta_on_circle_matches_closed_form(x):
    eta = eta_regularized(circle_spectrum(x))
    assert eta.value == pytest.approx(1 - 2 * x, abs=1e-10)
    assert circle_eta(2 * np.pi * x / L, L) == pytest.approx(1 - 2 * x, abs=1e-14)


def test_eta_of_symmetric_spectrum_vanishes():
    lam = np.linspace(0.3, 40.0, 300)
    assert abs(eta_regularized(np.concatenate([lam, -lam])).value) < 1e-13


def test_eta_rejects_zero_mode():
    with pytest.raises(SpectralError):
        eta_regularized(circle_spectrum(0.0))
    with pytest.raises(SpectralError):
        circle_eta(1.0, L)


def test_eta_of_shifted_dirac_spectrum():
    # sqrt(k^2 + m^2) pairs are symmetric, a single chiral branch is not
    m = 0.7
    k = np.arange(-300, 301)
    sym = np.sqrt(k**2 + m**2)
    lam = np.concatenate([sym, -sym, [m]])
    assert eta_regularized(lam, odd_only=False).value == pytest.approx(1.0, abs=1e-8)


def test_eigensolve_checks_hermiticity():
    bad = HermitianOperator([np.array([[0, 1], [0, 0]], dtype=complex)])
    with pytest.raises(SpectralError):
        eigensolve(bad)
    ok = HermitianOperator([np.diag([1.0, -2.0]).astype(complex)], [np.array([1.0, -1.0])])
    spec = eigensolve(ok)
    assert np.allclose(spec.eigenvalues, [-2.0, 1.0])
    assert np.allclose(spec.chirality, [-1.0, 1.0])


def family(alpha, nu, cutoff=12, length=1.0):
    cfg = n2_config("f", 0, nu, alpha=alpha).gauge()
    return assemble_wall_family(wall_gauge(cfg), (cutoff,), length, 16)


def test_flow_zero_and_one():
    assert spectral_flow(family(0.2, 0.5)).flow == 0
    fam = family(0.3, 1.0)
    res = spectral_flow(fam)
    assert len(res.crossings) == 1
    # the wall mode eigenvalue k + alpha + nu f(s) with k = -1 crosses upwards where f = 0.7
    s_star = brentq(lambda s: smear(np.array([s]))[0] - 0.7, 0.0, 1.0, xtol=1e-14)
    assert res.crossings[0].s == pytest.approx(s_star, abs=1e-5)
    assert res.flow == 1 and res.crossings[0].direction == 1


def test_flow_reverses_with_the_path():
    fam = family(0.3, 1.0)
    assert spectral_flow(fam.reversed()).flow == -spectral_flow(fam).flow


def test_flow_counts_multiple_crossings():
    assert spectral_flow(family(0.3, 2.0)).flow == 2


def test_endpoint_zero_mode_raises():
    with pytest.raises(SpectralError):
        spectral_flow(family(0.0, 0.3))
