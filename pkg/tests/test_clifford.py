import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from dwindex.clifford import GammaRep, chirality, standard_rep, wall_adapt, wall_hat_gammas


@pytest.mark.parametrize("n", [2, 4])
def test_standard_rep_relations(n):
    rep = standard_rep(n)
    assert rep.spinor_dim == 2 ** (n // 2)
    assert rep.clifford_residual() < 1e-13
    res = rep.chirality_residuals()
    assert max(res.values()) < 1e-13
    for g in rep.gammas:
        assert np.abs(g - g.conj().T).max() < 1e-15
    assert abs(np.trace(rep.gamma_star)) < 1e-13


@pytest.mark.parametrize("n", [2, 4])
def test_wall_adapted_block_form(n):
    rep = wall_adapt(standard_rep(n))
    d = rep.spinor_dim // 2
    eye = np.eye(d)
    gs = rep.gamma_star
    assert np.allclose(gs[:d, :d], eye) and np.allclose(gs[d:, d:], -eye)
    assert np.allclose(rep.gammas[-1], np.kron(np.array([[0, 1j], [-1j, 0]]), eye))
    for a, h in enumerate(rep.hat):
        assert np.allclose(rep.gammas[a], np.kron(np.array([[0, 1], [1, 0]]), h))
    assert rep.orientation_residual() < 1e-13
    assert rep.clifford_residual() < 1e-13


def test_n2_hat_gamma_value():
    # the orientation constraint selects the 1x1 matrix -1
    assert wall_hat_gammas(2)[0, 0, 0] == -1


@given(st.integers(0, 10_000))
def test_relations_survive_unitary_change_of_basis(seed):
    rep = standard_rep(4)
    U = unitary_group.rvs(4, random_state=seed)
    gam = np.array([U @ g @ U.conj().T for g in rep.gammas])
    new = GammaRep(4, gam, chirality(gam))
    assert new.clifford_residual() < 1e-12
    assert max(new.chirality_residuals().values()) < 1e-12


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        wall_hat_gammas(6)
