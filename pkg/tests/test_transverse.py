import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from dwindex.config import n2_config
from dwindex.transverse import (
    TransverseError,
    chain_problems,
    circle_problems,
    line_problem,
    solve_transverse,
    transfer_matrix,
    zero_mode_counts,
)

L = 2 * np.pi


def sharp(Q=0, nu=0.0, alpha=0.2):
    return n2_config("t", Q, nu, alpha=alpha).gauge(kind="sharp")


def test_constant_circle_spectrum_is_analytic():
    problems = circle_problems(sharp(0, 0.0, 0.2), kmax=2)
    window = 3.0
    spec = solve_transverse(problems, window, grid=600)
    expected = []
    for k in range(-2, 3):
        for m in range(-4, 5):
            e = np.hypot(k + 0.2, m)
            if e <= window:
                expected += [e, -e]
    assert spec.index == 0
    assert np.allclose(np.sort(spec.eigenvalues), np.sort(expected), atol=1e-10)


@given(st.floats(-2.0, 2.0), st.floats(-3.0, 3.0))
def test_transfer_matrix_exact_for_constant_lambda(lam, E):
    problems = circle_problems(sharp(0, 0.0, lam), kmax=0)
    T = transfer_matrix(problems[0], E)
    M = np.array([[-lam, E], [-E, lam]])
    ref = expm(M * L)
    assert np.abs(T - ref).max() < 1e-9 * max(1.0, np.abs(ref).max())
    # unimodular up to cancellation in the 2x2 determinant
    assert abs(np.linalg.det(T) - 1.0) < 1e-13 * max(1.0, np.abs(T).max() ** 2)


def test_circle_has_no_kernel_without_zero_holonomy():
    problems = circle_problems(sharp(0, 0.7, 0.2), kmax=4)
    assert all(zero_mode_counts(p) == (0, 0) for p in problems)


def test_line_zero_modes():
    assert zero_mode_counts(line_problem(-1.0, 2.0)) == (1, 0)
    assert zero_mode_counts(line_problem(1.0, -2.0)) == (0, 1)
    assert zero_mode_counts(line_problem(1.0, 2.0)) == (0, 0)


@pytest.mark.parametrize("Q, nu", [(1, 0.0), (1, 0.7), (2, 0.3)])
def test_chain_index_equals_flux(Q, nu):
    spec = solve_transverse(chain_problems(sharp(Q, nu), window=1.0), 1.0, grid=64)
    assert spec.index == Q


def test_chain_spectrum_without_wall_is_landau():
    # no jump: the spectrum is +-sqrt(2 b k), b = 2 pi / L^2
    spec = solve_transverse(chain_problems(sharp(1, 0.0, 0.0), window=1.5, hmax=0.05), 1.5, grid=150)
    b = 2 * np.pi / L**2
    nz = np.sort(spec.eigenvalues[np.abs(spec.eigenvalues) > 1e-9])
    levels = np.sqrt(2 * b * np.arange(1, 20))
    levels = levels[levels <= 1.5]
    assert np.allclose(nz, np.sort(np.concatenate([-levels, levels])), atol=1e-7)


def test_smoothed_or_nonabelian_rejected():
    cfg = n2_config("t", 0, 0.3).gauge(kind="smoothed", delta=0.5)
    with pytest.raises(TransverseError):
        circle_problems(cfg, 2)
    with pytest.raises(TransverseError):
        chain_problems(sharp(0, 0.3), 1.0)
