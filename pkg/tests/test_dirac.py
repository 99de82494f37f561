import numpy as np
import pytest

from dwindex.clifford import standard_rep, wall_adapt
from dwindex.config import n2_config
from dwindex.dirac import (
    AssemblyError,
    BulkGalerkin,
    LandauChains,
    assemble_bulk,
    export_operator,
    load_operator,
    square,
)
from dwindex.geometry import build_modes
from dwindex.spectral import Spectrum, eigensolve, index_heat_trace

L = 2 * np.pi
TIMES = (0.5, 1.0, 2.0)


def smooth(Q=0, nu=0.0, alpha=0.2, levels=600):
    return n2_config("t", Q, nu, alpha=alpha, levels=levels).gauge(kind="smoothed", delta=1.0)


def test_free_torus_spectrum_is_plus_minus_momentum():
    cfg = smooth(0, 0.0, alpha=0.0)
    op = BulkGalerkin(cfg, standard_rep(2), (1, 1)).hermitian_operator()
    lam = np.sort(eigensolve(op).eigenvalues)
    p = np.array([np.hypot(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)])
    expected = np.sort(np.concatenate([p, -p]))
    assert np.allclose(lam, expected, atol=1e-13)
    # nine momenta: +-sqrt(2) four times each
    assert np.sum(np.isclose(lam, np.sqrt(2))) == 4


def test_galerkin_matches_real_space_quadrature():
    """Matrix elements from plane waves and a pointwise connection on a fine grid."""
    cfg = smooth(0, 0.3, alpha=0.2)
    cut = (2, 6)
    gal = BulkGalerkin(cfg, standard_rep(2), cut)
    block = gal.hermitian_operator().blocks
    modes = gal.sectors()
    assert len(modes) == 5  # x1 momentum is conserved
    rep = gal.rep
    x = np.linspace(-L / 2, L / 2, 1024, endpoint=False)
    A1 = 0.2j + 1j * 2 * np.pi * 0.3 / L * cfg.profile.value(x)
    for (label, dom), blk in zip(modes, block):
        k1 = label[0]
        ks = dom[:, 1]
        phase = np.exp(1j * np.outer(ks, x))
        M = len(ks)
        ref = np.zeros((2 * M, 2 * M), dtype=complex)
        for a in range(2):
            for b in range(2):
                # i gamma^1 (i k1 + A1) + i gamma^2 (i k_s)
                g1, g2 = rep.gammas[0][a, b], rep.gammas[1][a, b]
                pot = (phase.conj() * (1j * g1 * (1j * k1 + A1))[None, :]) @ phase.T / len(x)
                ref[a * M:(a + 1) * M, b * M:(b + 1) * M] = pot + np.diag(-g2 * ks)
        assert np.abs(blk - ref).max() < 1e-12


def test_operator_is_hermitian_and_odd():
    op = BulkGalerkin(smooth(0, 0.7), standard_rep(2), (6, 6)).hermitian_operator()
    assert op.hermiticity_residual() < 1e-13
    assert op.chirality_residual() < 1e-13
    sq = square(op)
    assert sq.chirality_residual() < 1e-12


def test_uniform_flux_index_one():
    cfg = smooth(1, 0.0, alpha=0.0)
    lc = LandauChains(cfg, standard_rep(2), levels=300)
    ht = index_heat_trace(Spectrum.from_compressions(lc.compressed_squares()), TIMES)
    assert ht.index == 1
    assert ht.deviation < 1e-8


@pytest.mark.parametrize("Q", [-2, 2])
def test_flux_sign_controls_index(Q):
    cfg = n2_config("t", Q, 0.3).gauge(kind="smoothed", delta=1.0)
    lc = LandauChains(cfg, standard_rep(2), levels=300)
    ht = index_heat_trace(Spectrum.from_compressions(lc.compressed_squares()), TIMES)
    assert ht.index == Q


def test_landau_operator_kernel_is_chiral():
    cfg = smooth(1, 0.3, levels=200)
    op = LandauChains(cfg, standard_rep(2), levels=200).hermitian_operator()
    assert op.hermiticity_residual() < 1e-12
    spec = eigensolve(op)
    small = np.abs(spec.eigenvalues) < 1e-8
    assert small.sum() == 1
    assert spec.chirality[small][0] == pytest.approx(1.0, abs=1e-8)


def test_cutoff_stability():
    cfg = smooth(0, 0.7)
    vals = []
    for K in (16, 24):
        spec = Spectrum.from_compressions(BulkGalerkin(cfg, standard_rep(2), (K, K)).compressed_squares())
        vals.append(index_heat_trace(spec, TIMES).values)
    assert np.abs(vals[0] - vals[1]).max() < 1e-6


def test_sharp_profile_rejected():
    cfg = n2_config("t", 0, 0.3).gauge(kind="sharp")
    with pytest.raises(AssemblyError):
        assemble_bulk(cfg.geom, build_modes(cfg.geom, (2, 2)), standard_rep(2), cfg)
    with pytest.raises(AssemblyError):
        BulkGalerkin(smooth(1), standard_rep(2), (2, 2))


def test_export_roundtrip(tmp_path):
    op = BulkGalerkin(smooth(0, 0.3), standard_rep(2), (2, 3)).hermitian_operator()
    path = tmp_path / "op.bin"
    export_operator(op, path)
    mat, info = load_operator(path)
    assert int(info["dimension"]) == op.dim
    assert np.array_equal(mat, op.matrix)
    assert "Fourier-Galerkin" in info["basis"]


def test_wall_adapted_rep_used():
    gal = BulkGalerkin(smooth(0, 0.3), standard_rep(2), (1, 1))
    assert gal.rep.wall_adapted
    assert np.allclose(gal.rep.gamma_star, wall_adapt(standard_rep(2)).gamma_star)
