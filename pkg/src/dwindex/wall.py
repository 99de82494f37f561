"""The family ``D(s) = D^- + f(s/l) i hat-gamma^a B_a`` of Dirac operators on the wall.

``D(s) = i hat-gamma^a (d_a + A_a(s))`` with ``A(s) = A^- + f(s/l) B`` acts on
``Sigma = T^{n-1}`` and is discretized by Fourier-Galerkin on the wall modes.
Momenta in directions where neither ``A^-`` nor ``B`` has Fourier support are
conserved, so the matrices are stored as blocks, one per conserved sector.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clifford import wall_hat_gammas
from .dirac import HermitianOperator
from .gauge import GaugeConfig, make_profile_f
from .geometry import mode_grid


def fourier_dirac_matrix(gammas, fields, modes: np.ndarray, lengths, derivative: bool = True):
    """Dense Galerkin matrix of ``i gamma^a (d_a + A_a)`` on ``modes``.

    Ordering is (spinor, mode, colour).  Couplings leaving the mode set are
    dropped (square truncation).  With ``derivative=False`` only the gauge term
    ``i gamma^a A_a`` is assembled.
    """
    modes = np.asarray(modes, dtype=int)
    M = len(modes)
    S = gammas.shape[1]
    N = fields[0].rank
    out = np.zeros((S, M, N, S, M, N), dtype=complex)
    if derivative:
        p = 2 * np.pi * modes / np.asarray(lengths)
        dblk = -np.einsum("km,mab->kab", p, np.asarray(gammas))
        idx = np.arange(M)
        for c in range(N):
            out[:, idx, c, :, idx, c] += dblk
    index = {tuple(k): i for i, k in enumerate(modes.tolist())}
    for a, fa in enumerate(fields):
        for q, cq in fa.as_dict().items():
            blk = np.einsum("ab,cd->acbd", 1j * gammas[a], cq)
            for j, k in enumerate(modes.tolist()):
                i = index.get(tuple(x + y for x, y in zip(k, q)))
                if i is not None:
                    out[:, i, :, :, j, :] += blk
    return out.reshape(S * M * N, S * M * N)


def conserved_directions(d, fields):
    coupled = np.zeros(d, dtype=bool)
    for f in fields:
        if len(f.modes):
            coupled |= np.any(f.modes != 0, axis=0)
    return [i for i in range(d) if not coupled[i]]


def sector_modes(cutoffs, fields):
    """Split the mode grid by momentum in directions the fields do not couple."""
    modes = mode_grid(cutoffs)
    cons = conserved_directions(modes.shape[1], fields)
    if not cons:
        return [((), modes)]
    keys, inv = np.unique(modes[:, cons], axis=0, return_inverse=True)
    inv = inv.ravel()
    return [(tuple(int(x) for x in k), modes[inv == i]) for i, k in enumerate(keys)]


def sector_dirac_blocks(gammas, fields, cutoffs, lengths, derivative: bool = True, coupling_fields=None):
    """``(label, matrix)`` per conserved-momentum sector.

    All sectors share the coupled-direction mode list, so the matrix of a
    sector is a common base plus ``-p_c gamma^c (x) id`` for the conserved
    momenta ``p_c``.
    """
    coupling_fields = list(fields) if coupling_fields is None else list(coupling_fields)
    sectors = sector_modes(cutoffs, coupling_fields)
    d = len(cutoffs)
    first = sectors[0][1]
    if sectors[0][0] == ():
        return [((), fourier_dirac_matrix(gammas, fields, first, lengths, derivative))]
    cons = conserved_directions(d, coupling_fields)
    base_modes = first.copy()
    base_modes[:, cons] = 0
    base = fourier_dirac_matrix(gammas, fields, base_modes, lengths, derivative)
    if not derivative:
        return [(label, base) for label, _ in sectors]
    S = gammas.shape[1]
    dimMN = base.shape[0] // S
    out = []
    for label, _ in sectors:
        shift = np.zeros((S, S), dtype=complex)
        for c, k in zip(cons, label):
            shift -= 2 * np.pi * k / lengths[c] * gammas[c]
        out.append((label, base + np.kron(shift, np.eye(dimMN))))
    return out


@dataclass
class WallFamily:
    """The path ``D(s) = D^- + f(s/l) J`` with ``J = i hat-gamma^a B_a``.

    ``op_minus`` and ``jump`` are lists of blocks.  ``samples`` and ``weights``
    are Gauss-Legendre nodes on ``[0, l]``.
    """

    cfg: GaugeConfig
    cutoffs: tuple
    length: float
    samples: np.ndarray
    weights: np.ndarray
    op_minus: list = field(repr=False)
    jump: list = field(repr=False)
    labels: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def wall_lengths(self):
        return self.cfg.geom.wall_lengths

    @property
    def op_plus(self) -> list:
        return [a + b for a, b in zip(self.op_minus, self.jump)]

    def f(self, s):
        return make_profile_f()[0](np.asarray(s, dtype=float) / self.length)

    def fprime(self, s):
        return make_profile_f()[1](np.asarray(s, dtype=float) / self.length) / self.length

    def blocks_at(self, s: float) -> list:
        fs = float(self.f(s))
        return [a + fs * b for a, b in zip(self.op_minus, self.jump)]

    def at(self, s: float) -> HermitianOperator:
        return HermitianOperator(self.blocks_at(s), None, list(self.labels), {"basis": f"wall modes {self.cutoffs}", "s": float(s)})

    def deriv(self, s: float) -> HermitianOperator:
        fp = float(self.fprime(s))
        return HermitianOperator([fp * b for b in self.jump], None, list(self.labels), {"s": float(s)})

    def endpoint(self, side: str) -> HermitianOperator:
        blocks = self.op_minus if side == "-" else self.op_plus
        return HermitianOperator(list(blocks), None, list(self.labels), {"side": side})

    def reversed(self) -> "WallFamily":
        """The same path traversed from ``D^+`` back to ``D^-``."""
        return WallFamily(
            self.cfg, self.cutoffs, self.length, self.samples, self.weights,
            self.op_plus, [-b for b in self.jump], list(self.labels), dict(self.meta, reversed=True),
        )

    def endpoint_residual(self) -> float:
        """``|D(l) - D(0) - J|`` from the sampled formula."""
        top, bot = self.blocks_at(self.length), self.blocks_at(0.0)
        return max(float(np.abs(t - b - j).max()) for t, b, j in zip(top, bot, self.jump))


def assemble_wall_family(cfg: GaugeConfig, cutoffs, length: float = 1.0, samples: int = 64) -> WallFamily:
    """Gauss-Legendre samples on ``[0, l]`` of the wall family built from ``cfg``."""
    if samples < 8:
        raise ValueError("need at least 8 samples")
    geom = cfg.geom
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != geom.n - 1:
        raise ValueError(f"expected {geom.n - 1} wall cutoffs")
    if cfg.flux:
        raise ValueError("the wall family needs a trivial bundle on the wall")
    hat = wall_hat_gammas(geom.n)
    coupling = list(cfg.a_minus) + list(cfg.b_jump)
    minus = sector_dirac_blocks(hat, cfg.a_minus, cutoffs, geom.wall_lengths, coupling_fields=coupling)
    jumps = sector_dirac_blocks(hat, cfg.b_jump, cutoffs, geom.wall_lengths, derivative=False, coupling_fields=coupling)
    labels = [lab for lab, _ in minus]
    op_minus = [m for _, m in minus]
    jump = [j for _, j in jumps]
    x, w = np.polynomial.legendre.leggauss(samples)
    return WallFamily(
        cfg, cutoffs, float(length), 0.5 * length * (x + 1), 0.5 * length * w, op_minus, jump, labels,
        {"samples": samples},
    )
