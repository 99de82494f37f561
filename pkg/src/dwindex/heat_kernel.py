"""Smeared heat-kernel coefficients on the flat wall and the relative spectral asymmetry.

For ``D(s)^2 = -nabla^2 + E`` on flat ``Sigma = T^d`` (``R = 0``) the smeared
heat trace expands as

    Tr(Q exp(-tau D^2)) ~ (4 pi tau)^{-d/2} [ int tr Q  -  tau int tr(Q E)  + O(tau^2) ]

so ``a_0(Q) = (4 pi)^{-d/2} int tr Q`` and ``a_2(Q) = A2_SIGN (4 pi)^{-d/2} int tr(Q E)``
with ``A2_SIGN = -1`` for ``E = -(1/2) hat-gamma^a hat-gamma^b F_ab``.  The sign is
not taken on trust: :func:`pin_a2_sign` recovers it from a regression of
the eigensolved heat trace over a ladder of ``tau``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .clifford import wall_hat_gammas
from .gauge import FourierField, GaugeConfig, _wall_curvature, uniform_grid
from .wall import WallFamily, sector_dirac_blocks

A2_SIGN = -1


class HeatKernelError(ValueError):
    pass


@dataclass
class LaplaceData:
    """``D^2 = -nabla^2 + E`` on ``Sigma`` sampled on a uniform grid."""

    d: int
    grids: list = field(repr=False)
    E: np.ndarray = field(repr=False)  # grid + (S N, S N)
    volume: float
    scalar_curvature: float = 0.0

    def hermitian_residual(self) -> float:
        return float(np.abs(self.E - np.conj(np.swapaxes(self.E, -1, -2))).max())


def wall_grid(lengths, support, factor: int = 4):
    """Uniform grid fine enough to integrate products of a few Fourier fields exactly."""
    pts = [max(8, factor * int(k) + 4) for k in support]
    return uniform_grid(lengths, pts)


def _support(fields):
    d = fields[0].dim
    sup = np.zeros(d, dtype=int)
    for f in fields:
        sup = np.maximum(sup, f.support())
    return sup


def lichnerowicz_E(fields, grids) -> np.ndarray:
    """``E = -(1/2) hat-gamma^a hat-gamma^b F_ab`` on the grid, spinor (x) colour."""
    d = len(fields)
    hat = wall_hat_gammas(d + 1)
    S = hat.shape[1]
    N = fields[0].rank
    shape = tuple(len(g) for g in grids)
    E = np.zeros(shape + (S * N, S * N), dtype=complex)
    if d < 2:
        return E
    F = _wall_curvature(fields, grids)
    for (a, b), Fab in F.items():
        gg = hat[a] @ hat[b]
        # -(1/2)(g^a g^b F_ab + g^b g^a F_ba) = -g^a g^b F_ab for a < b
        E -= np.einsum("ij,...kl->...ikjl", gg, Fab).reshape(shape + (S * N, S * N))
    return E


def laplace_data(fields, lengths, grids=None) -> LaplaceData:
    if grids is None:
        grids = wall_grid(lengths, _support(fields))
    return LaplaceData(len(lengths), grids, lichnerowicz_E(fields, grids), float(np.prod(lengths)))


def jump_endomorphism(b_fields, grids) -> np.ndarray:
    """``i hat-gamma^a B_a`` on the grid."""
    d = len(b_fields)
    hat = wall_hat_gammas(d + 1)
    S = hat.shape[1]
    N = b_fields[0].rank
    shape = tuple(len(g) for g in grids)
    out = np.zeros(shape + (S * N, S * N), dtype=complex)
    for a, b in enumerate(b_fields):
        out += np.einsum("ij,...kl->...ikjl", 1j * hat[a], b.evaluate(grids)).reshape(out.shape)
    return out


def _grid_integral(values, volume):
    # trapezoid on a periodic uniform grid = mean times volume
    return values.mean() * volume


def a0_smeared(Q: np.ndarray, volume: float, d: int) -> complex:
    """``(4 pi)^{-d/2} int tr Q`` for ``Q`` sampled on a uniform grid."""
    trQ = np.trace(Q, axis1=-2, axis2=-1)
    return (4 * np.pi) ** (-d / 2) * _grid_integral(trQ, volume)


def a2_smeared(Q: np.ndarray, data: LaplaceData) -> complex:
    if data.scalar_curvature != 0.0:
        raise HeatKernelError("curved wall: only R = 0 is implemented")
    trQE = np.einsum("...ij,...ji->...", Q, data.E)
    return A2_SIGN * (4 * np.pi) ** (-data.d / 2) * _grid_integral(trQE, data.volume)


# ---------------------------------------------------------------- tau-ladder fit


def smeared_heat_trace(fields, q_fields, lengths, cutoffs, taus):
    """Eigensolved ``Tr(Q exp(-tau D^2))`` for ``D = i hat-gamma^a (d_a + A_a)`` on the wall.

    ``Q = i hat-gamma^a q_a`` with ``q_a`` anti-Hermitian Fourier fields (the
    shape of ``dD/ds``).  Sectors of conserved momentum are summed.
    """
    d = len(lengths)
    hat = wall_hat_gammas(d + 1)
    taus = np.asarray(taus, dtype=float)
    tot = np.zeros(len(taus))
    coupling = list(fields) + list(q_fields)
    Qm = sector_dirac_blocks(hat, q_fields, cutoffs, lengths, derivative=False, coupling_fields=coupling)[0][1]
    for _, D in sector_dirac_blocks(hat, fields, cutoffs, lengths, coupling_fields=coupling):
        w, v = sla.eigh(D)
        qd = np.real((v.conj() * (Qm @ v)).sum(axis=0))
        tot += np.exp(-np.outer(taus, w**2)) @ qd
    return tot


@dataclass
class LadderFit:
    taus: np.ndarray
    coefficients: np.ndarray  # c_0, c_1, ... of (4 pi tau)^{d/2} Tr(Q e^{-tau D^2})
    a0_predicted: float
    a2_predicted: float

    @property
    def a2_sign(self) -> int:
        """Sign relating the fitted ``tau`` coefficient to ``int tr(Q E)``."""
        return int(np.sign(self.coefficients[1] / self.a2_predicted))


def ladder_fit(fields, q_fields, lengths, cutoffs, taus, order: int = 4) -> LadderFit:
    """Regress ``(4 pi tau)^{d/2} Tr(Q e^{-tau D^2})`` on ``1, tau, ..., tau^order``."""
    d = len(lengths)
    taus = np.asarray(taus, dtype=float)
    y = (4 * np.pi * taus) ** (d / 2) * smeared_heat_trace(fields, q_fields, lengths, cutoffs, taus)
    A = np.stack([taus**k for k in range(order + 1)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    grids = wall_grid(lengths, _support(list(fields) + list(q_fields)))
    Q = jump_endomorphism(q_fields, grids)
    data = laplace_data(fields, lengths, grids)
    vol = float(np.prod(lengths))
    a0 = float(np.real(_grid_integral(np.trace(Q, axis1=-2, axis2=-1), vol)))
    trQE = float(np.real(_grid_integral(np.einsum("...ij,...ji->...", Q, data.E), vol)))
    return LadderFit(taus, coef, a0, trQE)


def canonical_t3_fields(a: float = 0.6, b: float = 0.5, c: float = 0.0):
    """Abelian ``T^3`` data with ``F_12 != 0`` and a jump along ``x^3``, used to pin signs."""
    L = (2 * np.pi,) * 3
    A = (
        FourierField.zero(L),
        FourierField.from_dict({(1, 0, 0): 0.5 * a, (-1, 0, 0): 0.5 * a}, L).scale(1j),
        FourierField.from_dict({(0, 0, 0): c}, L).scale(1j) if c else FourierField.zero(L),
    )
    B = (
        FourierField.zero(L),
        FourierField.zero(L),
        FourierField.from_dict({(1, 0, 0): -0.5j * b, (-1, 0, 0): 0.5j * b}, L).scale(1j),
    )
    return A, B, L


def pin_a2_sign(cutoffs=(20, 20, 20), taus=None) -> int:
    """Sign of ``a_2`` in terms of ``int tr(Q E)``, from the spectral fit on a canonical ``T^3`` config."""
    A, B, L = canonical_t3_fields()
    if taus is None:
        taus = np.linspace(0.06, 0.3, 12)
    return ladder_fit(A, B, L, cutoffs, taus).a2_sign


# ---------------------------------------------------------------- relative eta


@dataclass
class EtaResult:
    value: float
    error: float
    nodes: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)
    flow: int | None = None
    eta_minus: float | None = None
    eta_plus: float | None = None
    meta: dict = field(default_factory=dict)

    def table(self):
        return [(float(s), float(v)) for s, v in zip(self.nodes, self.integrand)]


def integrand_sampler(cfg: GaugeConfig, length: float, grids=None):
    """``s -> a_{n-2}(dD/ds, D(s)^2)`` for the cylinder family of ``cfg``."""
    from .gauge import make_profile_f

    f, fp, _ = make_profile_f()
    d = cfg.geom.n - 1
    lengths = cfg.geom.wall_lengths
    fields_all = list(cfg.a_minus) + list(cfg.b_jump)
    if grids is None:
        sup = _support(fields_all)
        grids = wall_grid(lengths, sup)
    J = jump_endomorphism(cfg.b_jump, grids)
    vol = float(np.prod(lengths))
    if d == 1:
        a0J = a0_smeared(J, vol, d)

        def integrand(s):
            return float(np.real(fp(np.array([s / length]))[0] / length * a0J))

        return integrand
    if d == 3:

        def integrand(s):
            fs = float(f(np.array([s / length]))[0])
            fields = [am + b.scale(fs) for am, b in zip(cfg.a_minus, cfg.b_jump)]
            data = LaplaceData(d, grids, lichnerowicz_E(fields, grids), vol)
            Q = (float(fp(np.array([s / length]))[0]) / length) * J
            return float(np.real(a2_smeared(Q, data)))

        return integrand
    raise HeatKernelError(f"wall dimension {d} not supported")


def relative_eta(family: WallFamily | GaugeConfig, length: float | None = None, nodes: int = 64, check_nodes: int = 96, flow: bool = False) -> EtaResult:
    """``eta~ = -(2/sqrt(pi)) int_0^l a_{n-2}(dD/ds, D(s)^2) ds`` by Gauss-Legendre.

    The error estimate is the difference to a ``check_nodes`` rule.  With
    ``flow=True`` (and a :class:`WallFamily`) the spectral flow and the endpoint
    eta invariants are computed from the family's eigenvalues as well.
    """
    if isinstance(family, WallFamily):
        cfg, l = family.cfg, family.length
    else:
        cfg, l = family, float(length if length is not None else 1.0)
    integrand = integrand_sampler(cfg, l)

    def rule(m):
        x, w = np.polynomial.legendre.leggauss(m)
        s = 0.5 * l * (x + 1)
        vals = np.array([integrand(si) for si in s])
        return s, vals, float(0.5 * l * w @ vals)

    s, vals, I = rule(nodes)
    _, _, I2 = rule(check_nodes)
    pref = -2.0 / np.sqrt(np.pi)
    res = EtaResult(pref * I, abs(pref * (I - I2)), s, vals, meta={"wall_dim": cfg.geom.n - 1, "nodes": nodes})
    if flow:
        if not isinstance(family, WallFamily):
            raise HeatKernelError("spectral flow needs an assembled wall family")
        from .spectral import eta_regularized, spectral_flow

        res.flow = spectral_flow(family).flow
        ev = lambda blocks: np.concatenate([np.linalg.eigvalsh(b) for b in blocks])
        odd = cfg.geom.n == 2
        res.eta_minus = eta_regularized(ev(family.op_minus), odd_only=odd).value
        res.eta_plus = eta_regularized(ev(family.op_plus), odd_only=odd).value
    return res


def check_lemma31(cfg: GaugeConfig, length: float = 1.0, nodes: int = 64) -> dict:
    """``|int_C P + (1/2) eta~|`` on the pasted cylinder ``Sigma x [0, l]``."""
    from .forms import cylinder_pontryagin

    if not cfg.axial:
        raise HeatKernelError("non-product configuration")
    eta = relative_eta(cfg, length, nodes=nodes)
    bulk = cylinder_pontryagin(cfg, length)
    return {"cylinder_integral": bulk, "minus_half_eta": -0.5 * eta.value, "residual": abs(bulk + 0.5 * eta.value), "eta": eta}
