import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dwindex.gauge import (
    FourierField,
    GaugeError,
    Profile,
    assemble_gauge,
    field_strength,
    make_chi_delta,
    smear,
    smear_deriv,
)
from dwindex.geometry import build_torus

L = 2 * np.pi


def test_smear_endpoints_and_monotone():
    u = np.linspace(0, 1, 401)
    f = smear(u)
    assert f[0] == pytest.approx(0.0, abs=1e-15)
    assert f[-1] == pytest.approx(1.0, abs=1e-13)
    assert np.all(np.diff(f) >= -1e-15)
    # flat at both ends, so pasting is smooth
    assert abs(smear_deriv(np.array([0.0]))[0]) < 1e-12
    assert abs(smear_deriv(np.array([1.0]))[0]) < 1e-12


@given(st.floats(0.02, 0.98))
def test_smear_derivative_matches_difference_quotient(u):
    h = 1e-5
    fd = (smear(np.array([u + h])) - smear(np.array([u - h])))[0] / (2 * h)
    assert smear_deriv(np.array([u]))[0] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_sharp_profile_limits():
    p = Profile("sharp", L)
    assert p.limit_minus == 0.0 and p.limit_plus == 1.0 and p.jump == 1.0
    assert not p.continuous
    assert p.value(np.array([-1e-9]))[0] == pytest.approx(0.0)
    assert p.value(np.array([1e-9]))[0] == pytest.approx(1.0)


@given(st.floats(0.05, 0.95))
def test_smoothed_one_sided_values(delta):
    p = make_chi_delta(delta, 1.3, L, ramp=1.3, return_start=1.45)
    assert p.limit_minus == pytest.approx(delta / 2)
    assert p.limit_plus == pytest.approx(1 - delta / 2)
    assert p.jump == pytest.approx(1 - delta)


def test_delta_one_is_continuous_and_periodic():
    p = make_chi_delta(1.0, 1.3, L, ramp=1.3, return_start=1.45)
    assert p.continuous
    s = np.linspace(-L / 2, L / 2, 2001)
    v = p.value(s)
    assert np.max(np.abs(np.diff(v))) < 0.01
    assert p.value(np.array([-L / 2]))[0] == pytest.approx(p.value(np.array([L / 2]))[0], abs=1e-12)


def test_profile_derivative_integrates_to_zero_over_circle():
    p = make_chi_delta(1.0, 1.3, L, ramp=1.3, return_start=1.45)
    nodes, weights = p.quadrature(24)
    assert abs(weights @ p.deriv(nodes)) < 1e-12


@pytest.mark.parametrize("kw", [dict(kind="box"), dict(kind="smoothed", delta=1.5), dict(kind="sharp", delta0=4.0)])
def test_profile_rejects_bad_parameters(kw):
    args = dict(kind="sharp", base_length=L) | kw
    with pytest.raises(GaugeError):
        Profile(**args)


def test_fourier_field_evaluation_matches_direct_sum(rng):
    table = {(1, 0): 0.3j, (-1, 0): 0.3j, (0, 2): -0.2j, (0, -2): -0.2j}
    f = FourierField.from_dict(table, (L, 3.0))
    x = np.linspace(0, L, 7, endpoint=False)
    y = np.linspace(0, 3.0, 5, endpoint=False)
    direct = 0.3j * 2 * np.cos(x)[:, None] - 0.2j * 2 * np.cos(2 * 2 * np.pi * y / 3.0)[None, :]
    vals = f.evaluate([x, y])
    assert np.allclose(vals[..., 0, 0], direct)
    assert f.anti_hermitian_residual() < 1e-15
    df = f.derivative(0).evaluate([x, y])[..., 0, 0]
    assert np.allclose(df, -0.6j * np.sin(x)[:, None] * np.ones_like(y))


def test_fourier_field_rejects_wrong_shape():
    with pytest.raises(GaugeError):
        FourierField.from_dict({(1,): 1.0}, (L, L))
    with pytest.raises(GaugeError):
        FourierField.from_dict({(0, 0): np.eye(3)}, (L, L), rank=2)


def test_assemble_gauge_validation():
    geom = build_torus(2, [L, L])
    herm = FourierField.from_dict({(0,): 1.0}, (L,))
    with pytest.raises(GaugeError):
        assemble_gauge(geom, "U(1)", [herm], None, Profile("sharp", L))
    with pytest.raises(GaugeError):
        assemble_gauge(geom, "U(1)", None, None, Profile("sharp", 3.0))
    geom4 = build_torus(4, [L] * 4)
    with pytest.raises(GaugeError):
        assemble_gauge(geom4, "U(1)", None, None, Profile("sharp", L), flux=1)


def test_field_strength_transverse_component():
    # F_{1s} = -g'(s) B_1 for a constant wall jump B_1 = i b
    b = 0.4
    geom = build_torus(2, [L, L])
    B = FourierField.from_dict({(0,): 1j * b}, (L,))
    prof = make_chi_delta(1.0, 1.3, L, ramp=1.3, return_start=1.45)
    cfg = assemble_gauge(geom, "U(1)", None, [B], prof)
    s = np.array([-0.3, 0.1, 0.5])
    fs = field_strength(cfg, [np.zeros(1)], s)
    F = fs.component(0, 1)[0, :, 0, 0]
    assert np.allclose(F, -prof.deriv(s) * 1j * b)
    assert np.allclose(fs.component(1, 0)[0, :, 0, 0], -F)


def test_field_strength_refuses_jump_slice():
    geom = build_torus(2, [L, L])
    B = FourierField.from_dict({(0,): 0.4j}, (L,))
    cfg = assemble_gauge(geom, "U(1)", None, [B], Profile("sharp", L))
    with pytest.raises(GaugeError):
        field_strength(cfg, [np.zeros(1)], np.array([0.0]))
