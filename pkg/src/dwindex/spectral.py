"""Eigenanalysis and spectral functionals: heat-trace index, eta, spectral flow."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla
from scipy.optimize import linear_sum_assignment
from scipy.special import erfc

from .dirac import HermitianOperator


class SpectralError(RuntimeError):
    pass


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    chirality: np.ndarray | None = None
    vectors: list | None = field(default=None, repr=False)
    residual: float = 0.0
    labels: list = field(default_factory=list, repr=False)
    norm: float = 1.0

    def __len__(self):
        return len(self.eigenvalues)

    @classmethod
    def from_compressions(cls, sectors) -> "Spectrum":
        """Spectrum ``lambda = sqrt(mu)`` with chirality +-1 from the chiral compressions.

        ``sectors`` is an iterable of ``(label, mu_right, mu_left)``.
        """
        vals, chir, labels = [], [], []
        for label, mr, ml in sectors:
            for mu, c in ((mr, 1.0), (ml, -1.0)):
                mu = np.clip(np.asarray(mu, dtype=float), 0.0, None)
                vals.append(np.sqrt(mu))
                chir.append(np.full(len(mu), c))
                labels.extend([label] * len(mu))
        vals = np.concatenate(vals)
        chir = np.concatenate(chir)
        order = np.argsort(vals, kind="stable")
        return cls(vals[order], chir[order], None, 0.0, [labels[i] for i in order], float(vals.max(initial=1.0)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue", "chirality"])
            for i, lam in enumerate(self.eigenvalues):
                c = "" if self.chirality is None else repr(float(self.chirality[i]))
                w.writerow([i, repr(float(lam)), c])


def _kernel_chirality(vals, vecs, chir_diag, thresh):
    """Chirality expectations, with the near-kernel rotated to diagonalize gamma_*."""
    c = np.real(np.einsum("ij,i,ij->j", vecs.conj(), chir_diag, vecs))
    zero = np.flatnonzero(np.abs(vals) <= thresh)
    if len(zero):
        V = vecs[:, zero]
        G = V.conj().T @ (chir_diag[:, None] * V)
        w = sla.eigvalsh(0.5 * (G + G.conj().T))
        c[zero] = w
    return c


def eigensolve(
    op: HermitianOperator,
    vectors: bool = False,
    zero_tol: float = 1e-10,
    herm_tol: float = 1e-12,
    dense_limit: int = 20000,
    window: int | None = None,
) -> Spectrum:
    """Full spectrum block by block (dense), or the ``window`` eigenvalues nearest 0 (iterative).

    Raises :class:`SpectralError` if the input is not Hermitian or a residual
    ``|H psi - lambda psi|`` exceeds ``1e-9 |H|``.
    """
    norm = max(op.norm(), 1e-300)
    if op.hermiticity_residual() > herm_tol * max(1.0, norm):
        raise SpectralError(f"operator not Hermitian (residual {op.hermiticity_residual():.3e})")
    vals, chir, labels, vecs = [], [], [], []
    worst = 0.0
    for b, blk in enumerate(op.blocks):
        n = blk.shape[0]
        if n == 0:
            continue
        if n > dense_limit or window is not None and window < n:
            k = min(window or 64, n - 2)
            w, v = spla.eigsh(blk, k=k, sigma=0.0, which="LM")
        else:
            w, v = sla.eigh(blk)
        res = np.abs(blk @ v - v * w).max(axis=0) if len(w) else np.zeros(0)
        worst = max(worst, float(res.max(initial=0.0)))
        vals.append(w)
        if op.chirality is not None:
            chir.append(_kernel_chirality(w, v, op.chirality[b], zero_tol * norm))
        lab = op.labels[b] if b < len(op.labels) else b
        labels.extend([lab] * len(w))
        if vectors:
            vecs.append(v)
    if worst > 1e-9 * norm:
        raise SpectralError(f"eigensolver residual {worst:.3e} exceeds 1e-9 |H| = {1e-9 * norm:.3e}")
    vals = np.concatenate(vals) if vals else np.zeros(0)
    order = np.argsort(vals, kind="stable")
    chir_arr = np.concatenate(chir)[order] if chir else None
    return Spectrum(vals[order], chir_arr, vecs if vectors else None, worst, [labels[i] for i in order], norm)


@dataclass
class HeatTraceIndex:
    times: np.ndarray
    values: np.ndarray
    index: int
    deviation: float  # max |value - index| over t

    @property
    def spread(self) -> float:
        return float(np.ptp(self.values))


def index_heat_trace(spec: Spectrum, times) -> HeatTraceIndex:
    """``sum_i <gamma_*>_i exp(-t lambda_i^2)`` at each ``t``."""
    if spec.chirality is None:
        raise SpectralError("spectrum carries no chirality data")
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise SpectralError("heat-trace times must be positive")
    lam2 = spec.eigenvalues**2
    vals = np.array([float(np.sum(spec.chirality * np.exp(-t * lam2))) for t in times])
    idx = int(np.rint(vals.mean()))
    return HeatTraceIndex(times, vals, idx, float(np.abs(vals - idx).max()))


@dataclass
class EtaValue:
    value: float
    error: float
    taus: np.ndarray = field(repr=False)
    smoothed: np.ndarray = field(repr=False)


def _fit_zero(x, y, powers):
    A = np.stack([x**p for p in powers], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def eta_regularized(
    spec: Spectrum | np.ndarray,
    zero_tol: float = 1e-10,
    ladder: int = 6,
    edge: float = 7.0,
    ratio: float = 1.25,
    odd_only: bool = True,
) -> EtaValue:
    """``eta(0)`` from erfc-smoothed signed sums extrapolated to ``tau -> 0``.

    ``S(tau) = sum sign(lambda) erfc(|lambda| sqrt(tau))`` is evaluated on a
    ladder of ``tau`` whose smallest member keeps the truncation edge at
    ``|lambda| sqrt(tau) >= edge``.  ``S`` is expanded in powers of ``sqrt(tau)``
    (odd powers only for operators whose eta function is regular at negative
    odd integers, such as the circle) and the constant term is taken.  The error
    is the change when the highest-order term is dropped.  The ladder spans a
    factor ``ratio^(ladder-1) ~ 3`` only: at larger ``tau`` the terms of order
    ``exp(-c / tau)``, invisible to the power series, contaminate the fit.
    """
    lam = np.asarray(spec.eigenvalues if isinstance(spec, Spectrum) else spec, dtype=float)
    scale = max(np.abs(lam).max(initial=0.0), 1e-300)
    if np.any(np.abs(lam) <= zero_tol * scale):
        raise SpectralError("zero mode present: eta is undefined at a crossing")
    pos, neg = lam[lam > 0], -lam[lam < 0]
    # smallest |lambda| at the truncation edge on either side
    edge_val = min(pos.max(initial=np.inf), neg.max(initial=np.inf))
    if not np.isfinite(edge_val):
        edge_val = scale
    tau0 = (edge / edge_val) ** 2
    taus = tau0 * ratio ** np.arange(ladder)
    sm = np.array([erfc(pos * np.sqrt(t)).sum() - erfc(neg * np.sqrt(t)).sum() for t in taus])
    x = np.sqrt(taus)
    if odd_only:
        powers = [0] + [2 * j + 1 for j in range(ladder - 2)]
    else:
        powers = list(range(ladder - 1))
    val = _fit_zero(x, sm, powers)
    val_lo = _fit_zero(x, sm, powers[:-1])
    return EtaValue(val, abs(val - val_lo), taus, sm)


def circle_eta(a: float, length: float) -> float:
    """Closed form ``eta(0)`` for the spectrum ``(2 pi / L)(k + x)``, ``x = a L / 2 pi`` not an integer."""
    x = a * length / (2 * np.pi)
    frac = x - np.floor(x)
    if frac == 0.0:
        raise SpectralError("zero mode present")
    return 1.0 - 2.0 * frac


# ---------------------------------------------------------------- spectral flow


@dataclass
class Crossing:
    s: float
    direction: int
    block: object


@dataclass
class FlowResult:
    flow: int
    crossings: list
    samples: np.ndarray = field(repr=False)


def _block_eigs(blocks, vectors=False):
    out = []
    for b in blocks:
        if vectors:
            out.append(sla.eigh(b))
        else:
            out.append(sla.eigvalsh(b))
    return out


def _neg_count(blocks, thresh):
    counts = []
    for b in blocks:
        w = sla.eigvalsh(b)
        if np.any(np.abs(w) <= thresh):
            return None
        counts.append(int(np.sum(w < 0)))
    return counts


def spectral_flow(family, zero_tol: float = 1e-10, grid: int | None = None, rel_bisect: float = 1e-6) -> FlowResult:
    """Net number of eigenvalues of ``D(s)`` crossing zero upwards as ``s`` goes from 0 to ``l``.

    Eigenvalues are followed block by block on a uniform grid.  Branches are
    matched between neighbouring samples by eigenvector overlap (assignment on
    ``|<psi_i(s_j), psi_k(s_{j+1})>|``).  A branch whose sign changes marks a
    crossing, which is then located by bisection on the negative-eigenvalue
    count of its block to ``l * rel_bisect``.
    """
    l = family.length
    n = grid or max(4 * len(family.samples), 64)
    s_grid = np.linspace(0.0, l, n + 1)
    norm = max(max(np.abs(b).sum(axis=1).max() for b in family.op_minus + family.op_plus), 1e-300)
    thresh = zero_tol * norm
    for end in (0.0, l):
        if _neg_count(family.blocks_at(end), thresh) is None:
            raise SpectralError(f"zero mode at the endpoint s = {end}")
    crossings = []
    flow = 0
    nb = len(family.op_minus)
    prev = _block_eigs(family.blocks_at(s_grid[0]), vectors=True)
    for j in range(1, len(s_grid)):
        cur = _block_eigs(family.blocks_at(s_grid[j]), vectors=True)
        for b in range(nb):
            w0, v0 = prev[b]
            w1, v1 = cur[b]
            ov = np.abs(v0.conj().T @ v1)
            r, c = linear_sum_assignment(-ov)
            w1m = np.empty_like(w1)
            w1m[r] = w1[c]
            up = int(np.sum((w0 < 0) & (w1m > 0)))
            down = int(np.sum((w0 > 0) & (w1m < 0)))
            # the count difference is the robust quantity; tracking attributes direction
            dn = int(np.sum(w0 < 0)) - int(np.sum(w1 < 0))
            if up - down != dn:
                up, down = max(dn, 0), max(-dn, 0)
            for direction, count in ((1, up), (-1, down)):
                for _ in range(count):
                    s_c = _bisect_crossing(family, b, s_grid[j - 1], s_grid[j], l * rel_bisect)
                    crossings.append(Crossing(s_c, direction, family.labels[b] if b < len(family.labels) else b))
            flow += dn
        prev = cur
    crossings.sort(key=lambda c: c.s)
    return FlowResult(int(flow), crossings, s_grid)


def _bisect_crossing(family, b, lo, hi, tol):
    def neg(s):
        return int(np.sum(sla.eigvalsh(family.blocks_at(s)[b]) < 0))

    n_lo = neg(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if neg(mid) == n_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
