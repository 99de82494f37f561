"""Finite representations of the bulk Dirac operator ``i gamma^mu (d_mu + A_mu)``.

Two discretizations are provided.

* :class:`BulkGalerkin` -- Fourier-Galerkin on the torus for a trivial bundle.
  The transverse profile enters through its Fourier series.  Directions in
  which the gauge data carries no momentum are conserved, and the operator is
  assembled sector by sector.
* :class:`LandauChains` -- abelian ``n = 2`` with ``Q`` units of background
  flux and gauge data constant along the wall.  In the Landau gauge the
  wall momenta chain into ``|Q|`` copies of a one-dimensional problem on the
  line, discretized with Hermite functions.

Both expose the square Galerkin matrix (a Hermitian operator) and the
*compressions* ``P D^dag D P`` of the squared operator on each chirality,
computed with an untruncated image.  A square Galerkin truncation always has
``dim ker D_R - dim ker D_L = dim V_R - dim V_L``, so the index is read off
the compressions instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .clifford import GammaRep, wall_adapt
from .gauge import GaugeConfig, GaugeError
from .geometry import FourierModeSet, TorusGeometry, mode_grid


class AssemblyError(ValueError):
    pass


@dataclass
class HermitianOperator:
    """Block-diagonal Hermitian matrix; each block is one conserved-momentum sector.

    ``chirality`` holds the diagonal of ``gamma_*`` (entries +-1) per block, or
    ``None`` when no chirality matrix is attached.
    """

    blocks: list
    chirality: list | None = None
    labels: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    order: int = 1

    @property
    def dim(self) -> int:
        return sum(b.shape[0] for b in self.blocks)

    @property
    def matrix(self) -> np.ndarray:
        return sla.block_diag(*self.blocks) if len(self.blocks) > 1 else self.blocks[0]

    @property
    def gamma_star(self) -> np.ndarray | None:
        if self.chirality is None:
            return None
        return np.diag(np.concatenate(self.chirality)).astype(complex)

    def norm(self) -> float:
        return max((np.abs(b).sum(axis=1).max() if b.size else 0.0) for b in self.blocks)

    def hermiticity_residual(self) -> float:
        return max((float(np.abs(b - b.conj().T).max()) if b.size else 0.0) for b in self.blocks)

    def chirality_residual(self) -> float:
        """``|G H + H G|`` for first-order operators, ``|G H - H G|`` for squares."""
        if self.chirality is None:
            raise AssemblyError("no chirality attached")
        sign = 1 if self.order == 1 else -1
        res = 0.0
        for b, c in zip(self.blocks, self.chirality):
            if b.size:
                res = max(res, float(np.abs(c[:, None] * b + sign * b * c[None, :]).max()))
        return res

    @classmethod
    def from_matrix(cls, mat, chirality=None, **meta) -> "HermitianOperator":
        mat = np.asarray(mat, dtype=complex)
        chir = None if chirality is None else [np.real(np.diag(chirality)) if np.ndim(chirality) == 2 else np.asarray(chirality, float)]
        return cls([mat], chir, ["all"], dict(meta))


def square(op: HermitianOperator) -> HermitianOperator:
    """Matrix square, block by block."""
    if op.hermiticity_residual() > 1e-10 * max(1.0, op.norm()):
        raise AssemblyError("operator is not Hermitian")
    blocks = [b @ b for b in op.blocks]
    return HermitianOperator(blocks, op.chirality, list(op.labels), dict(op.meta), order=2)


def export_operator(op: HermitianOperator, path, basis: str = "") -> None:
    """Dump as a text header followed by row-major little-endian complex128 pairs."""
    mat = np.ascontiguousarray(op.matrix, dtype="<c16")
    header = f"dwindex-operator\ndimension {mat.shape[0]}\nbasis {basis or op.meta.get('basis', 'unspecified')}\nend\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(mat.tobytes(order="C"))


def load_operator(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    end = raw.index(b"\nend\n") + len(b"\nend\n")
    lines = raw[:end].decode("ascii").splitlines()
    info = dict(line.split(" ", 1) for line in lines[1:-1])
    n = int(info["dimension"])
    mat = np.frombuffer(raw[end:], dtype="<c16").reshape(n, n)
    return mat, info


# --------------------------------------------------------------------------
# Fourier-Galerkin on a trivial bundle


def _encode(modes: np.ndarray, base: int) -> np.ndarray:
    # injective integer key for integer vectors with |k_i| < base/2
    key = np.zeros(len(modes), dtype=np.int64)
    for i in range(modes.shape[1]):
        key = key * base + (modes[:, i] + base // 2)
    return key


class BulkGalerkin:
    """Fourier-Galerkin discretization of the bulk operator on a trivial bundle."""

    def __init__(self, cfg: GaugeConfig, rep: GammaRep, cutoffs, profile_kmax: int | None = None):
        if cfg.flux:
            raise AssemblyError("nonzero flux needs the Landau chain discretization")
        self.cfg = cfg
        self.rep = wall_adapt(rep)
        self.geom = cfg.bulk_geometry
        n = self.geom.n
        self.cutoffs = tuple(int(c) for c in cutoffs)
        if len(self.cutoffs) != n:
            raise AssemblyError(f"expected {n} cutoffs")
        self.profile_kmax = 2 * self.cutoffs[-1] if profile_kmax is None else int(profile_kmax)
        self.S = self.rep.spinor_dim
        self.N = cfg.rank
        self.terms = self._gauge_terms()
        support = np.array([q for q in self.terms], dtype=int).reshape(-1, n)
        nonzero = np.any(support != 0, axis=0) if len(support) else np.zeros(n, bool)
        self.conserved = tuple(i for i in range(n) if not nonzero[i])
        self.support = support
        self._base = 2 * (max(self.cutoffs) + int(np.abs(support).max(initial=0))) + 3

    @property
    def lengths(self):
        return self.geom.lengths

    def _gauge_terms(self) -> dict:
        """``q -> sum_a i gamma^a (x) A_a(q)`` as (S N) x (S N) matrices."""
        cfg, rep = self.cfg, self.rep
        n = self.geom.n
        ghat = cfg.profile.fourier(self.profile_kmax) if self.profile_kmax >= 0 else np.zeros(1)
        ms = np.arange(-self.profile_kmax, self.profile_kmax + 1)
        terms: dict = {}

        def add(q, a, coeff):
            block = np.kron(1j * rep.gammas[a], coeff)
            terms[q] = terms.get(q, 0) + block

        for a in range(n - 1):
            for k, c in cfg.a_minus[a].as_dict().items():
                add(tuple(k) + (0,), a, c)
            for k, c in cfg.b_jump[a].as_dict().items():
                for m, gm in zip(ms, ghat):
                    if abs(gm) > 1e-16:
                        add(tuple(k) + (int(m),), a, c * gm)
        return {q: v for q, v in terms.items() if np.abs(v).max() > 0}

    def sectors(self):
        """Domain mode arrays grouped by the conserved momentum components."""
        modes = mode_grid(self.cutoffs)
        if not self.conserved:
            return [((), modes)]
        cons = modes[:, self.conserved]
        keys, inv = np.unique(cons, axis=0, return_inverse=True)
        inv = inv.ravel()
        return [(tuple(k), modes[inv == i]) for i, k in enumerate(keys)]

    def _image(self, dom: np.ndarray) -> np.ndarray:
        if len(self.support) == 0:
            return dom
        cand = (dom[:, None, :] + self.support[None, :, :]).reshape(-1, dom.shape[1])
        dom_key = _encode(dom, self._base)
        cand_key = _encode(cand, self._base)
        extra_key, first = np.unique(cand_key, return_index=True)
        keep = ~np.isin(extra_key, dom_key)
        return np.concatenate([dom, cand[first[keep]]])

    def operator_columns(self, dom: np.ndarray):
        """Sparse matrix of the operator from ``dom`` (all spinors) into its exact image."""
        S, N = self.S, self.N
        img = self._image(dom)
        M, Mi = len(dom), len(img)
        key_img = _encode(img, self._base)
        order = np.argsort(key_img)
        sorted_keys = key_img[order]

        def lookup(modes):
            pos = np.searchsorted(sorted_keys, _encode(modes, self._base))
            return order[pos]

        rows, cols, vals = [], [], []
        sN = np.arange(S)[:, None, None, None] * (Mi * N)
        cN = np.arange(N)[None, :, None, None]
        s2 = np.arange(S)[None, None, :, None] * (M * N)
        c2 = np.arange(N)[None, None, None, :]
        jdom = np.arange(M)

        def emit(i_img, blocks):
            # blocks: (M, S, N, S, N)
            r = sN[None] + i_img[:, None, None, None, None] * N + cN[None]
            c = s2[None] + jdom[:, None, None, None, None] * N + c2[None]
            r, c = np.broadcast_arrays(r, c)
            rows.append(r.ravel())
            cols.append(c.ravel())
            vals.append(blocks.ravel())

        # derivative term -p_mu gamma^mu
        p = 2 * np.pi * dom / np.asarray(self.lengths)
        dblock = -np.einsum("km,mab->kab", p, self.rep.gammas)
        dblock = np.einsum("kab,cd->kacbd", dblock, np.eye(N))
        emit(jdom, dblock)
        for q, g in self.terms.items():
            i_img = lookup(dom + np.asarray(q))
            blk = np.broadcast_to(g.reshape(S, N, S, N), (M, S, N, S, N))
            emit(i_img, blk)
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(S * Mi * N, S * M * N)
        ).tocsr()
        return mat, img

    def _index_sets(self, nmodes_rows, nmodes_cols):
        S, N = self.S, self.N
        half = S // 2

        def idx(nm, spins):
            return (np.array(spins)[:, None] * (nm * N) + np.arange(nm * N)[None, :]).ravel()

        return idx, half

    def sector_blocks(self, dom: np.ndarray):
        """(square Hermitian block, chirality diagonal, D_R exact, D_L exact) for one sector."""
        S, N = self.S, self.N
        half = S // 2
        mat, img = self.operator_columns(dom)
        M, Mi = len(dom), len(img)

        def rows_for(spins, nm):
            return (np.array(spins)[:, None] * (Mi * N) + np.arange(nm * N)[None, :]).ravel()

        def cols_for(spins):
            return (np.array(spins)[:, None] * (M * N) + np.arange(M * N)[None, :]).ravel()

        right, left = list(range(half)), list(range(half, S))
        sq_rows = np.concatenate([rows_for([s], M) for s in range(S)])
        square_block = mat[sq_rows, :].toarray()
        chir = np.concatenate([np.full(M * N, 1.0 if s < half else -1.0) for s in range(S)])
        d_r = mat[rows_for(left, Mi)][:, cols_for(right)]
        d_l = mat[rows_for(right, Mi)][:, cols_for(left)]
        return square_block, chir, d_r, d_l

    def hermitian_operator(self) -> HermitianOperator:
        blocks, chir, labels = [], [], []
        for label, dom in self.sectors():
            b, c, _, _ = self.sector_blocks(dom)
            blocks.append(b)
            chir.append(c)
            labels.append(label)
        meta = {
            "basis": f"Fourier-Galerkin spinor x mode x color, cutoffs {self.cutoffs}",
            "cutoffs": self.cutoffs,
            "spinor_dim": self.S,
            "rank": self.N,
        }
        return HermitianOperator(blocks, chir, labels, meta)

    def compressed_squares(self):
        """Per sector: eigenvalues of ``P D_R^dag D_R P`` and ``P D_L^dag D_L P``."""
        out = []
        for label, dom in self.sectors():
            _, _, d_r, d_l = self.sector_blocks(dom)
            g_r = (d_r.conj().T @ d_r).toarray()
            g_l = (d_l.conj().T @ d_l).toarray()
            out.append((label, sla.eigvalsh(g_r), sla.eigvalsh(g_l)))
        return out


# --------------------------------------------------------------------------
# Landau chains: abelian n = 2 with background flux


def hermite_functions(x: np.ndarray, nmax: int):
    """Orthonormal Hermite functions ``h_0..h_nmax`` and derivatives at ``x``.

    The three-term recurrence is run with a running log scale so that values
    far outside ``|x| ~ 37`` do not underflow to zero prematurely.
    """
    x = np.asarray(x, dtype=float)
    h = np.empty((nmax + 2, len(x)))
    logscale = -0.5 * x**2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    scale = logscale.copy()
    h[0] = cur * np.exp(scale)
    for n in range(nmax + 1):
        nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            cur[big] *= 1e-100
            prev[big] *= 1e-100
            scale[big] += 100 * np.log(10.0)
        h[n + 1] = cur * np.exp(scale)
    dh = np.empty((nmax + 1, len(x)))
    n = np.arange(nmax + 1)[:, None]
    dh[0] = -np.sqrt(0.5) * h[1]
    dh[1:] = np.sqrt(n[1:] / 2.0) * h[: nmax] - np.sqrt((n[1:] + 1) / 2.0) * h[2 : nmax + 2]
    return h[: nmax + 1], dh


class LandauChains:
    """Abelian ``n = 2`` bulk operator with ``Q != 0`` units of flux.

    The potential along the wall is ``A_1 = i lambda_r(s)`` on chain ``r`` with
    ``lambda_r(s) = p_r + b s + alpha^- + beta g(s)`` extended to the line,
    ``b = 2 pi Q / (L_1 L_2)``.  The right-handed component sees
    ``D_R = d_s + lambda`` and the left-handed one ``D_L = -d_s + lambda``.
    """

    def __init__(self, cfg: GaugeConfig, rep: GammaRep, levels: int = 600, nodes_per_panel: int = 12):
        if not cfg.flux:
            raise AssemblyError("Landau chains need nonzero flux")
        if cfg.geom.n != 2 or not cfg.is_abelian() or not cfg.sigma_constant():
            raise AssemblyError("Landau chains need abelian n = 2 data constant along the wall")
        self.cfg = cfg
        self.rep = wall_adapt(rep)
        self.geom = cfg.bulk_geometry
        self.levels = int(levels)
        self.nodes_per_panel = nodes_per_panel
        L1, L2 = self.geom.lengths
        self.b = 2 * np.pi * cfg.flux / (L1 * L2)
        self.ell = 1.0 / np.sqrt(abs(self.b))
        self.alpha_minus = float(np.real(cfg.a_minus[0].mean()[0, 0] / 1j))
        self.beta = float(np.real(cfg.b_jump[0].mean()[0, 0] / 1j))
        prof = cfg.profile
        # mean of g over a period fixes the chain centre
        nodes, weights = prof.quadrature(20)
        self.gbar = float(weights @ prof.value(nodes)) / prof.period
        self.chains = abs(cfg.flux)
        # levels per chirality: the zero-mode chirality keeps one extra level
        plus = cfg.flux > 0
        self.n_right = self.levels + 1 if plus else self.levels
        self.n_left = self.levels if plus else self.levels + 1

    def chain_momentum(self, r: int) -> float:
        return 2 * np.pi * r / self.geom.lengths[0]

    def _lambda(self, r, s):
        return self.chain_momentum(r) + self.b * s + self.alpha_minus + self.beta * self.cfg.profile.value(s)

    def quadrature(self, r):
        """Composite Gauss-Legendre on the chain support, aligned with profile breakpoints."""
        centre = -(self.chain_momentum(r) + self.alpha_minus + self.beta * self.gbar) / self.b
        half = self.ell * (np.sqrt(2 * self.levels + 3) + 8.0)
        lo, hi = centre - half, centre + half
        prof = self.cfg.profile
        P = prof.period
        bp = prof.breakpoints()
        kmin, kmax = int(np.floor((lo - bp.max()) / P)), int(np.ceil((hi - bp.min()) / P))
        pts = (bp[None, :] + P * np.arange(kmin, kmax + 1)[:, None]).ravel()
        pts = np.unique(np.concatenate([[lo, hi], pts[(pts > lo) & (pts < hi)]]))
        width = self.ell * np.pi / np.sqrt(2 * self.levels + 3)
        x, w = np.polynomial.legendre.leggauss(self.nodes_per_panel)
        nodes, weights = [], []
        for a, b in zip(pts[:-1], pts[1:]):
            k = max(1, int(np.ceil((b - a) / width)))
            e = np.linspace(a, b, k + 1)
            aa, bb = e[:-1, None], e[1:, None]
            nodes.append((0.5 * (bb - aa) * (x + 1) + aa).ravel())
            weights.append((0.5 * (bb - aa) * w).ravel())
        return np.concatenate(nodes), np.concatenate(weights), centre

    def chain_data(self, r):
        """Basis values and exact operator images on the chain quadrature grid."""
        s, w, centre = self.quadrature(r)
        nmax = max(self.n_right, self.n_left) - 1
        xi = (s - centre) / self.ell
        h, dh = hermite_functions(xi, nmax)
        h /= np.sqrt(self.ell)
        dh /= self.ell**1.5
        lam = self._lambda(r, s)
        hr, dhr = h[: self.n_right], dh[: self.n_right]
        hl, dhl = h[: self.n_left], dh[: self.n_left]
        d_r = dhr + lam * hr  # (d_s + lambda) on right-handed basis
        d_l = -dhl + lam * hl  # (-d_s + lambda) on left-handed basis
        return s, w, hr, hl, d_r, d_l

    def hermitian_operator(self) -> HermitianOperator:
        blocks, chir, labels = [], [], []
        for r in range(self.chains):
            s, w, hr, hl, d_r, d_l = self.chain_data(r)
            gal_r = (hl * w) @ d_r.T  # <h^L_m, D_R h^R_n>
            nr, nl = self.n_right, self.n_left
            blk = np.zeros((nr + nl, nr + nl))
            blk[nr:, :nr] = gal_r
            blk[:nr, nr:] = gal_r.T
            blocks.append(blk.astype(complex))
            chir.append(np.concatenate([np.ones(nr), -np.ones(nl)]))
            labels.append((r,))
        meta = {"basis": f"Landau chains, Hermite levels {self.n_right}/{self.n_left}", "levels": self.levels}
        return HermitianOperator(blocks, chir, labels, meta)

    def compressed_squares(self):
        out = []
        for r in range(self.chains):
            s, w, hr, hl, d_r, d_l = self.chain_data(r)
            g_r = (d_r * w) @ d_r.T
            g_l = (d_l * w) @ d_l.T
            out.append(((r,), sla.eigvalsh(g_r), sla.eigvalsh(g_l)))
        return out


def bulk_discretization(cfg: GaugeConfig, rep: GammaRep, cutoffs, profile_kmax=None, levels: int = 600):
    if cfg.flux:
        return LandauChains(cfg, rep, levels=levels)
    return BulkGalerkin(cfg, rep, cutoffs, profile_kmax)


def assemble_bulk(geom: TorusGeometry, modes: FourierModeSet, rep: GammaRep, cfg: GaugeConfig, **kw) -> HermitianOperator:
    """Square Galerkin matrix of the bulk operator; sharp profiles are rejected."""
    if cfg.profile.kind == "sharp":
        raise AssemblyError("sharp profile: use the transverse solver or smooth the wall first")
    if geom.n != cfg.geom.n:
        raise AssemblyError("geometry mismatch")
    return bulk_discretization(cfg, rep, modes.cutoffs, **kw).hermitian_operator()
