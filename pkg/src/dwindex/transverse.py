"""Sharp-wall transverse problems for abelian ``n = 2``.

For a wall Fourier mode (or a Landau chain) the bulk operator reduces to

    D = [[0, Lam - d_s], [Lam + d_s, 0]],     Lam(s) = p + alpha(s)

acting on ``(psi_R, psi_L)``.  ``D psi = E psi`` is the first-order system
``psi' = M psi`` with ``M = [[-Lam, E], [-E, Lam]]``.  Spinors are continuous
across the wall; the jump of ``psi'`` is then dictated by the system, which is
the derivative matching condition for a connection with a jump.

The propagator over a panel is the fourth-order Magnus exponential built from
``Lam`` at the two Gauss points.  ``Omega`` is a traceless 2x2 matrix so the
exponential is closed form, and it is exact where ``Lam`` is constant.

Three geometries are supported:

``circle``  transverse circle of the torus including the profile's return ramp;
            periodic spectrum from ``tr T(E) = 2``
``line``    the wall in ``R`` with constant one-sided values ``lam^-``, ``lam^+``
``chain``   Landau chains on ``R`` (flux ``Q != 0``), where ``Lam`` grows linearly
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .gauge import GaugeConfig, Profile

_G1, _G2 = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6


class TransverseError(ValueError):
    pass


@dataclass(frozen=True)
class TransverseModeProblem:
    """One reduced problem.  ``h`` and ``lam`` describe the panels (width, Lam at two Gauss points)."""

    kind: str
    label: tuple = ()
    h: np.ndarray = field(default=None, repr=False)
    lam: np.ndarray = field(default=None, repr=False)
    split: int = 0  # chain: number of panels left of s = 0
    holonomy: float = 0.0
    lam_minus: float = 0.0
    lam_plus: float = 0.0
    slope: float = 0.0


def _panel_exp(h, lam, E, sign=1):
    """``exp(sign * Omega)`` per panel for energies ``E``; shape (nE, P, 2, 2)."""
    E = np.atleast_1d(np.asarray(E, dtype=float))[:, None]
    l1, l2 = lam[None, :, 0], lam[None, :, 1]
    c = h * E * sign
    a = np.broadcast_to(-h * 0.5 * (l1 + l2) * sign, c.shape)
    d = np.sqrt(3) / 6 * h**2 * E * (l1 - l2) * sign
    k2 = a * a + d * d - c * c
    k = np.sqrt(np.abs(k2))
    small = k < 1e-8
    ks = np.where(small, 1.0, k)
    ch = np.where(k2 >= 0, np.cosh(k), np.cos(k))
    sh = np.where(small, 1.0 + k2 / 6, np.where(k2 >= 0, np.sinh(ks), np.sin(ks)) / ks)
    # Omega = a sz + c J + d sx with J = [[0, 1], [-1, 0]]
    out = np.empty(a.shape + (2, 2))
    out[..., 0, 0] = ch + sh * a
    out[..., 1, 1] = ch - sh * a
    out[..., 0, 1] = sh * (c + d)
    out[..., 1, 0] = sh * (d - c)
    return out


def _panels(prof: Profile, lo: float, hi: float, offset: float, hmax: float, merge_constant: bool = True):
    """Panels covering ``[lo, hi]`` aligned with the (periodic) profile breakpoints.

    Stretches where ``g`` is constant become a single panel when
    ``merge_constant`` is set, which is exact only if nothing else varies there.
    Returns widths, ``g`` at the two Gauss points, and the panel left edges.
    """
    P = prof.period
    bp = prof.breakpoints()
    kmin, kmax = int(np.floor((lo - bp.max()) / P)) - 1, int(np.ceil((hi - bp.min()) / P)) + 1
    pts = (bp[None, :] + P * np.arange(kmin, kmax + 1)[:, None]).ravel() + offset
    pts = np.unique(np.concatenate([[lo, hi], pts[(pts > lo) & (pts < hi)]]))
    widths, gvals, left = [], [], []
    for a, b in zip(pts[:-1], pts[1:]):
        probe = prof.value(np.linspace(a, b, 9)[1:-1] - offset)
        const = np.ptp(probe) == 0.0
        n = 1 if const and merge_constant else max(1, int(np.ceil((b - a) / hmax)))
        e = np.linspace(a, b, n + 1)
        ea, eb = e[:-1], e[1:]
        s1, s2 = ea + _G1 * (eb - ea), ea + _G2 * (eb - ea)
        if const:
            g = np.full((n, 2), float(prof.value(np.array([0.5 * (a + b) - offset]))[0]))
        else:
            g = np.stack([prof.value(s1 - offset), prof.value(s2 - offset)], axis=1)
        widths.append(eb - ea)
        gvals.append(g)
        left.append(ea)
    return np.concatenate(widths), np.concatenate(gvals), np.concatenate(left)


def _alpha_beta(cfg):
    am = float(np.real(cfg.a_minus[0].mean()[0, 0] / 1j))
    beta = float(np.real(cfg.b_jump[0].mean()[0, 0] / 1j))
    return am, beta


def _check(cfg: GaugeConfig):
    if cfg.geom.n != 2 or not cfg.is_abelian():
        raise TransverseError("transverse reduction needs abelian n = 2 data")
    if not cfg.sigma_constant():
        raise TransverseError("transverse reduction needs data constant along the wall")
    if cfg.profile.kind != "sharp":
        raise TransverseError("transverse solver handles the sharp wall only")


def circle_problems(cfg: GaugeConfig, kmax: int, hmax: float = 0.004):
    """One circle problem per wall Fourier mode ``|k| <= kmax``."""
    _check(cfg)
    if cfg.flux:
        raise TransverseError("flux configurations reduce to Landau chains")
    prof = cfg.profile
    half = prof.base_length / 2
    h, g, _ = _panels(prof, -half, half, 0.0, hmax)
    nodes, weights = prof.quadrature(24)
    gint = float(weights @ prof.value(nodes))
    am, beta = _alpha_beta(cfg)
    L1 = cfg.geom.lengths[0]
    out = []
    for k in range(-kmax, kmax + 1):
        p = 2 * np.pi * k / L1 + am
        out.append(TransverseModeProblem("circle", (k,), h, p + beta * g, holonomy=p * prof.period + beta * gint))
    return out


def line_problem(lam_minus: float, lam_plus: float, label=()) -> TransverseModeProblem:
    return TransverseModeProblem("line", label, lam_minus=float(lam_minus), lam_plus=float(lam_plus))


def chain_problems(cfg: GaugeConfig, window: float = 4.0, hmax: float = 0.01):
    """Landau chains on the line; the span is chosen so that states with ``|E| <= window`` decay."""
    _check(cfg)
    if not cfg.flux:
        raise TransverseError("chains need nonzero flux")
    prof = cfg.profile
    L1, L2 = cfg.geom.lengths
    b = 2 * np.pi * cfg.flux / (L1 * L2)
    am, beta = _alpha_beta(cfg)
    out = []
    for r in range(abs(cfg.flux)):
        p = 2 * np.pi * r / L1 + am
        centre = -(p + 0.5 * beta) / b
        span = (window + abs(beta) + 12.0) / abs(b)
        lo = min(0.0, centre - span)
        hi = max(0.0, centre + span)
        # Lam carries the linear term b s, so constant stretches of g are still subdivided
        hl, gl, xl = _panels(prof, lo, 0.0, 0.0, hmax, merge_constant=False)
        hr, gr, xr = _panels(prof, 0.0, hi, 0.0, hmax, merge_constant=False)
        h = np.concatenate([hl, hr])
        g = np.concatenate([gl, gr])
        x = np.concatenate([xl, xr])
        s = np.stack([x + _G1 * h, x + _G2 * h], axis=1)
        lam = p + b * s + beta * g
        out.append(TransverseModeProblem("chain", (r,), h, lam, split=len(hl), slope=b))
    return out


def transfer_matrix(problem: TransverseModeProblem, E) -> np.ndarray:
    """Monodromy over one period; shape (2, 2) for scalar ``E`` or (nE, 2, 2)."""
    scalar = np.ndim(E) == 0
    mats = _panel_exp(problem.h, problem.lam, E)
    T = np.broadcast_to(np.eye(2), (mats.shape[0], 2, 2)).copy()
    for j in range(mats.shape[1]):
        T = mats[:, j] @ T
    return T[0] if scalar else T


# ---------------------------------------------------------------- zero modes


def zero_mode_counts(problem: TransverseModeProblem, tol: float = 1e-12) -> tuple[int, int]:
    """Exact (right, left) kernel dimensions.

    At ``E = 0`` the system decouples: ``psi_R = exp(-int Lam)``,
    ``psi_L = exp(+int Lam)``.
    """
    if problem.kind == "circle":
        per = abs(problem.holonomy) < tol * max(1.0, float(problem.h.sum()))
        return (1, 1) if per else (0, 0)
    if problem.kind == "line":
        right = int(problem.lam_minus < 0 < problem.lam_plus)
        left = int(problem.lam_plus < 0 < problem.lam_minus)
        return right, left
    if problem.kind == "chain":
        return (1, 0) if problem.slope > 0 else (0, 1)
    raise TransverseError(f"unknown kind {problem.kind}")


# ---------------------------------------------------------------- spectra


def _circle_function(problem, E):
    T = transfer_matrix(problem, np.atleast_1d(E))
    return 2.0 - (T[:, 0, 0] + T[:, 1, 1])


def _circle_roots(problem, window, grid):
    Es = np.linspace(-window, window, grid)
    vals = _circle_function(problem, Es)
    f = lambda E: float(_circle_function(problem, E)[0])
    roots = []
    for i in range(len(Es) - 1):
        if vals[i] * vals[i + 1] < 0:
            roots.append((brentq(f, Es[i], Es[i + 1], xtol=1e-14, rtol=1e-15), 1))
    # tangent roots: T = I there, so both Floquet solutions are periodic (multiplicity 2)
    for i in range(1, len(Es) - 1):
        if abs(vals[i]) <= abs(vals[i - 1]) and abs(vals[i]) <= abs(vals[i + 1]) and vals[i - 1] * vals[i + 1] > 0:
            a, b = Es[i - 1], Es[i + 1]
            # golden-section on |2 - tr T|
            for _ in range(80):
                m1, m2 = a + 0.382 * (b - a), a + 0.618 * (b - a)
                if abs(f(m1)) < abs(f(m2)):
                    b = m2
                else:
                    a = m1
            E = 0.5 * (a + b)
            if np.abs(transfer_matrix(problem, E) - np.eye(2)).max() < 1e-6:
                roots.append((E, 2))
    return roots


def _evans(problem, E):
    """Wronskian at ``s = 0`` of the solutions decaying at both ends of the chain."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    fwd = _panel_exp(problem.h[: problem.split], problem.lam[: problem.split], E)
    bwd = _panel_exp(problem.h[problem.split :], problem.lam[problem.split :], E, sign=-1)
    l_end = problem.lam[0, 0]
    r_end = problem.lam[-1, 1]
    yl = np.stack([_decaying(l_end, e, True) for e in E])
    yr = np.stack([_decaying(r_end, e, False) for e in E])
    for j in range(fwd.shape[1]):
        yl = np.einsum("eij,ej->ei", fwd[:, j], yl)
        yl /= np.linalg.norm(yl, axis=1, keepdims=True)
    for j in range(bwd.shape[1] - 1, -1, -1):
        yr = np.einsum("eij,ej->ei", bwd[:, j], yr)
        yr /= np.linalg.norm(yr, axis=1, keepdims=True)
    return yl[:, 0] * yr[:, 1] - yl[:, 1] * yr[:, 0]


def _decaying(L, E, growing):
    # eigenvector of [[-L, E], [-E, L]] for w = +-sqrt(L^2 - E^2), in closed form so
    # that its sign is continuous in E
    w = np.sqrt(max(L * L - E * E, 0.0)) * (1 if growing else -1)
    v1 = np.array([E, L + w])
    v2 = np.array([L - w, E])
    v = v1 if np.linalg.norm(v1) > np.linalg.norm(v2) else v2
    return v / np.linalg.norm(v)


@dataclass
class TransverseSpectrum:
    eigenvalues: np.ndarray
    right_zero: int
    left_zero: int
    labels: list

    @property
    def index(self) -> int:
        return self.right_zero - self.left_zero


def solve_transverse(problems, window: float, grid: int = 400) -> TransverseSpectrum:
    """Eigenvalues with ``0 < |E| <= window`` plus the exact kernel, over a list of problems."""
    if isinstance(problems, TransverseModeProblem):
        problems = [problems]
    eig, labels = [], []
    nr = nl = 0
    for pb in problems:
        r, l = zero_mode_counts(pb)
        nr += r
        nl += l
        found = []
        if pb.kind == "circle":
            found = [(E, m) for E, m in _circle_roots(pb, window, grid) if abs(E) > 1e-9]
        elif pb.kind == "chain":
            Es = np.linspace(-window, window, grid)
            vals = _evans(pb, Es)
            for i in range(len(Es) - 1):
                if vals[i] * vals[i + 1] < 0:
                    E = brentq(lambda x: float(_evans(pb, x)[0]), Es[i], Es[i + 1], xtol=1e-13)
                    if abs(E) > 1e-8:
                        found.append((E, 1))
        # the line geometry has continuous spectrum away from zero
        for E, m in found:
            eig.extend([E] * m)
            labels.extend([pb.label] * m)
        eig.extend([0.0] * (r + l))
        labels.extend([pb.label] * (r + l))
    order = np.argsort(eig, kind="stable")
    return TransverseSpectrum(np.asarray(eig, dtype=float)[order], nr, nl, [labels[i] for i in order])
