import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwindex.config import n2_config, n4_config
from dwindex.gauge import FourierField
from dwindex.heat_kernel import (
    A2_SIGN,
    a0_smeared,
    check_lemma31,
    jump_endomorphism,
    pin_a2_sign,
    relative_eta,
    wall_grid,
)
from dwindex.pipeline import wall_gauge
from dwindex.wall import assemble_wall_family

L = 2 * np.pi


def n2_wall(nu, alpha=0.2):
    return wall_gauge(n2_config("hk", 0, nu, alpha=alpha).gauge())


def n4_wall(a, b, c):
    return wall_gauge(n4_config(a=a, b=b, c=c).gauge())


def test_a2_sign_pinned_by_ladder_fit():
    assert pin_a2_sign() == A2_SIGN


@given(st.floats(-1.5, 1.5))
def test_n2_relative_eta_is_minus_two_nu(nu):
    # the integrand is f'(s) times a constant, so the result is linear in nu
    assert relative_eta(n2_wall(nu), 1.0).value == pytest.approx(-2 * nu, abs=1e-12)


@settings(max_examples=6)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-0.5, 0.5))
def test_n4_relative_eta_closed_form(a, b, c):
    # only F_12 F_3s contributes: eta~ = 2 a b pi, independent of the constant c
    assert relative_eta(n4_wall(a, b, c), 1.0).value == pytest.approx(2 * a * b * np.pi, abs=1e-11)


def test_relative_eta_does_not_depend_on_length():
    cfg = n4_wall(0.6, 0.5, 0.3)
    vals = [relative_eta(cfg, l).value for l in (0.5, 1.0, 3.0)]
    assert np.ptp(vals) < 1e-12


def test_frozen_t4_value():
    # frozen reference: direct eigenvalue eta difference at wall cutoff 24 agreed to 1e-5
    assert relative_eta(n4_wall(0.6, 0.5, 0.3), 1.0).value == pytest.approx(1.8849555921538759, abs=1e-12)


def test_relative_eta_flow_reconciliation_n2():
    fam = assemble_wall_family(n2_wall(1.0, alpha=0.3), (24,), 1.0, 64)
    res = relative_eta(fam, flow=True)
    assert res.flow == 1
    assert abs(res.value - (res.eta_plus - res.eta_minus) + 2 * res.flow) < 1e-10


def test_a0_of_jump_endomorphism():
    B = FourierField.from_dict({(0,): 0.5j}, (L,))
    grids = wall_grid((L,), np.array([0]))
    J = jump_endomorphism([B], grids)
    # J = i hat-gamma B = i (-1)(0.5 i) = 0.5, and a_0 = vol tr J / sqrt(4 pi)
    assert np.allclose(J[..., 0, 0], 0.5)
    assert a0_smeared(J, L, 1) == pytest.approx(0.5 * L / np.sqrt(4 * np.pi), abs=1e-14)


@pytest.mark.parametrize("cfg, expected", [(n2_wall(0.3), 0.3), (n2_wall(0.7), 0.7), (n4_wall(0.6, 0.5, 0.3), -0.3 * np.pi)])
def test_lemma31_both_sides(cfg, expected):
    res = check_lemma31(cfg, 1.0)
    assert res["residual"] < 1e-10
    assert res["cylinder_integral"] == pytest.approx(expected, abs=1e-10)
