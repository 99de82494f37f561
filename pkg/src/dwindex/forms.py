"""Characteristic forms on grids: Chern character, A-hat, transgression, correction term.

A :class:`FormField` stores the independent components of a ``p``-form as a
dict ``{(i_1 < ... < i_p): array}``; arrays have the grid shape, optionally
followed by a matrix shape for Lie-algebra-valued forms.  Wedge products are
exact on components; ``d`` is spectral on uniform periodic grids.

Conventions (fixed by flux quantization): connections and curvatures are
anti-Hermitian (or real antisymmetric for the tangent bundle), and

    ch_k(F) = (1/k!) tr (iF / 2 pi)^k,        A-hat_4(R) = tr(R ^ R) / (192 pi^2) = -p_1 / 24.

The local index density ``P = tr(gamma_* a_n)`` equals ``sigma_n [A-hat ^ ch]_n``
with ``sigma_n = (-1)^(m+1)``, ``m = n/2``.  The sign comes from the chirality
convention ``gamma_* = -i^m gamma^1 ... gamma^n`` for Hermitian gammas, which
differs from ``(-i)^m gamma^1 ... gamma^n`` by ``(-1)^(m+1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial

import numpy as np

from .gauge import GaugeConfig, field_strength, make_profile_f, uniform_grid


class FormError(ValueError):
    pass


def _merge_sign(I, J):
    """Sign of the permutation sorting ``I + J``; 0 if they overlap."""
    if set(I) & set(J):
        return 0
    seq = list(I) + list(J)
    inv = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inv % 2 else 1


@dataclass
class FormField:
    """A ``degree``-form on an ``n``-dimensional tensor grid."""

    n: int
    degree: int
    comps: dict = field(repr=False)
    grid_shape: tuple = ()
    matrix: bool = False
    lengths: tuple | None = None  # uniform periodic grid lengths, enables d
    weights: list | None = field(default=None, repr=False)  # quadrature weights per axis

    def __post_init__(self):
        if self.degree > self.n:
            raise FormError("degree exceeds the dimension")
        for I in self.comps:
            if len(I) != self.degree or list(I) != sorted(set(I)):
                raise FormError(f"bad component index {I}")

    # -- construction
    @classmethod
    def zero(cls, n, degree, grid_shape, matrix_dim=None, **kw):
        shape = tuple(grid_shape) + ((matrix_dim, matrix_dim) if matrix_dim else ())
        return cls(n, degree, {I: np.zeros(shape, dtype=complex) for I in combinations(range(n), degree)}, tuple(grid_shape), bool(matrix_dim), **kw)

    @classmethod
    def constant(cls, n, value, grid_shape, **kw):
        arr = np.full(tuple(grid_shape), value, dtype=complex)
        return cls(n, 0, {(): arr}, tuple(grid_shape), False, **kw)

    @classmethod
    def from_antisymmetric(cls, n, tensor_comps, grid_shape, matrix=False, **kw):
        """2-form from ``{(mu, nu): F_{mu nu}}`` given for ``mu < nu``."""
        comps = {}
        for I in combinations(range(n), 2):
            if I in tensor_comps:
                comps[I] = np.asarray(tensor_comps[I], dtype=complex)
        return cls(n, 2, comps, tuple(grid_shape), matrix, **kw)

    def _like(self, degree, comps, matrix=None):
        return FormField(self.n, degree, comps, self.grid_shape, self.matrix if matrix is None else matrix, self.lengths, self.weights)

    # -- algebra
    def __add__(self, other):
        if other.degree != self.degree:
            raise FormError("adding forms of different degree")
        comps = dict(self.comps)
        for I, v in other.comps.items():
            comps[I] = comps[I] + v if I in comps else v
        return self._like(self.degree, comps, self.matrix or other.matrix)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return self._like(self.degree, {I: c * v for I, v in self.comps.items()})

    def wedge(self, other) -> "FormField":
        deg = self.degree + other.degree
        if deg > self.n:
            raise FormError("wedge degree exceeds the dimension")
        comps = {}
        for I, a in self.comps.items():
            for J, b in other.comps.items():
                s = _merge_sign(I, J)
                if s == 0:
                    continue
                K = tuple(sorted(I + J))
                if self.matrix and other.matrix:
                    prod = a @ b
                elif self.matrix:
                    prod = a * b[..., None, None]
                elif other.matrix:
                    prod = a[..., None, None] * b
                else:
                    prod = a * b
                comps[K] = comps[K] + s * prod if K in comps else s * prod
        return self._like(deg, comps, self.matrix or other.matrix)

    def trace(self) -> "FormField":
        if not self.matrix:
            return self
        return self._like(self.degree, {I: np.trace(v, axis1=-2, axis2=-1) for I, v in self.comps.items()}, False)

    def partial(self, mu: int, arr):
        if self.lengths is None:
            raise FormError("spectral derivative needs a uniform periodic grid")
        npts = self.grid_shape[mu]
        k = np.fft.fftfreq(npts, d=1.0 / npts)
        if npts % 2 == 0:
            k[npts // 2] = 0.0
        ik = 1j * 2 * np.pi * k / self.lengths[mu]
        shape = [1] * arr.ndim
        shape[mu] = npts
        return np.fft.ifft(ik.reshape(shape) * np.fft.fft(arr, axis=mu), axis=mu)

    def d(self) -> "FormField":
        if self.degree + 1 > self.n:
            raise FormError("d of a top form")
        comps = {}
        for I, v in self.comps.items():
            for mu in range(self.n):
                if mu in I:
                    continue
                s = _merge_sign((mu,), I)
                K = tuple(sorted((mu,) + I))
                dv = s * self.partial(mu, v)
                comps[K] = comps[K] + dv if K in comps else dv
        return self._like(self.degree + 1, comps)

    def max_abs(self) -> float:
        return max((float(np.abs(v).max()) for v in self.comps.values()), default=0.0)

    def integrate(self) -> complex:
        """Integral of a top form (scalar-valued) over the grid."""
        if self.degree != self.n:
            raise FormError("only top forms integrate")
        if self.matrix:
            raise FormError("take the trace first")
        top = tuple(range(self.n))
        v = self.comps.get(top)
        if v is None:
            return 0.0
        w = self.weights
        if w is None:
            if self.lengths is None:
                raise FormError("no quadrature weights")
            w = [np.full(npts, L / npts) for npts, L in zip(self.grid_shape, self.lengths)]
        out = v
        for ax in range(len(w) - 1, -1, -1):
            out = np.tensordot(out, w[ax], axes=([ax], [0]))
        return complex(out)

    # -- serialization
    def to_json(self):
        return {
            "n": self.n,
            "degree": self.degree,
            "grid_shape": list(self.grid_shape),
            "components": [
                {"index": list(I), "re": np.real(v).ravel().tolist(), "im": np.imag(v).ravel().tolist(), "shape": list(v.shape)}
                for I, v in sorted(self.comps.items())
            ],
        }

    @classmethod
    def from_json(cls, obj, **kw):
        comps = {}
        matrix = False
        for c in obj["components"]:
            arr = (np.array(c["re"]) + 1j * np.array(c["im"])).reshape(c["shape"])
            comps[tuple(c["index"])] = arr
            matrix = matrix or len(c["shape"]) > len(obj["grid_shape"])
        return cls(obj["n"], obj["degree"], comps, tuple(obj["grid_shape"]), matrix, **kw)


def power(F: FormField, k: int) -> FormField:
    out = F
    for _ in range(k - 1):
        out = out.wedge(F)
    return out


def chern_character(F: FormField, max_degree: int, rank: int | None = None) -> dict:
    """``{2k: ch_k(F)}`` for ``k <= max_degree/2``; ``ch_0`` is the rank."""
    if F.degree != 2:
        raise FormError("curvature must be a 2-form")
    if max_degree > F.n:
        raise FormError("degree beyond the dimension")
    if rank is None:
        rank = next(iter(F.comps.values())).shape[-1] if F.matrix else 1
    out = {0: FormField.constant(F.n, rank, F.grid_shape, lengths=F.lengths, weights=F.weights)}
    iF = F.scale(1j / (2 * np.pi))
    for k in range(1, max_degree // 2 + 1):
        out[2 * k] = power(iF, k).trace().scale(1.0 / factorial(k))
    return out


def a_hat(R: FormField, max_degree: int = 4) -> dict:
    """A-hat genus up to degree 4: ``{0: 1, 4: tr(R ^ R) / (192 pi^2)}``."""
    out = {0: FormField.constant(R.n, 1.0, R.grid_shape, lengths=R.lengths, weights=R.weights)}
    if max_degree >= 4 and R.n >= 4:
        out[4] = R.wedge(R).trace().scale(1.0 / (192 * np.pi**2))
    return out


def a_hat_chern_roots(xs) -> FormField:
    """``-p_1/24`` from Chern roots ``x_j`` (scalar 2-forms) of a block-diagonal curvature."""
    p1 = None
    for x in xs:
        term = x.wedge(x).scale(1.0 / (4 * np.pi**2))
        p1 = term if p1 is None else p1 + term
    return p1.scale(-1.0 / 24)


def curvature(conn: FormField) -> FormField:
    """``F = dA + A ^ A`` on a periodic grid."""
    return conn.d() + conn.wedge(conn)


def density_sign(n: int) -> int:
    """``sigma_n`` relating ``tr(gamma_* a_n)`` to ``[A-hat ^ ch]_n``."""
    if n % 2:
        raise FormError("odd dimension")
    return -1 if (n // 2) % 2 == 0 else 1


# ---------------------------------------------------------------- transgression


_T_NODES, _T_WEIGHTS = np.polynomial.legendre.leggauss(8)
_T_NODES = 0.5 * (_T_NODES + 1)
_T_WEIGHTS = 0.5 * _T_WEIGHTS


def transgression(poly: str, conn0: FormField, conn1: FormField) -> FormField:
    """``TP(conn1, conn0) = k int_0^1 dt P(a, F_t, ..., F_t)``, ``a = conn1 - conn0``.

    ``poly`` is ``"ch1"``, ``"ch2"``, ``"ch3"`` or ``"ahat4"``.  The integrand is a
    polynomial in ``t`` of low degree, integrated exactly by 8-point Gauss-Legendre.
    """
    if conn0.degree != 1 or conn1.degree != 1 or conn0.n != conn1.n:
        raise FormError("transgression needs two connections on the same space")
    a = conn1 - conn0
    if poly.startswith("ch"):
        k = int(poly[2:])
        coeff = (1j / (2 * np.pi)) ** k / factorial(k - 1)
    elif poly == "ahat4":
        k = 2
        coeff = 2.0 / (192 * np.pi**2)
    else:
        raise FormError(f"unknown polynomial {poly}")
    if 2 * k - 1 > conn0.n:
        raise FormError("degree/space mismatch")
    total = None
    if a.max_abs() == 0.0:
        return FormField.zero(conn0.n, 2 * k - 1, conn0.grid_shape, lengths=conn0.lengths, weights=conn0.weights)
    for t, w in zip(_T_NODES, _T_WEIGHTS):
        At = conn0 + a.scale(t)
        Ft = curvature(At)
        term = a
        for _ in range(k - 1):
            term = term.wedge(Ft)
        term = term.trace().scale(coeff * w)
        total = term if total is None else total + term
    return total


def polynomial_value(poly: str, F: FormField) -> FormField:
    if poly.startswith("ch"):
        k = int(poly[2:])
        return chern_character(F, 2 * k)[2 * k]
    if poly == "ahat4":
        return a_hat(F, 4)[4]
    raise FormError(f"unknown polynomial {poly}")


def transgression_residual(poly: str, conn0: FormField, conn1: FormField, relative: bool = False) -> float:
    """``max |d TP - (P(F_1) - P(F_0))|`` on the grid, optionally relative to ``max |P(F_1) - P(F_0)|``."""
    T = transgression(poly, conn0, conn1)
    lhs = T.d()
    rhs = polynomial_value(poly, curvature(conn1)) - polynomial_value(poly, curvature(conn0))
    res = (lhs - rhs).max_abs()
    return res / max(rhs.max_abs(), 1e-300) if relative else res


# ---------------------------------------------------------------- correction term


def correction_term_TA(gamma, gamma_deformed, F_plus, F_minus, max_degree: int | None = None) -> float:
    """``sigma_n int_Sigma TA-hat(Gamma^delta, Gamma) ^ [ch(F^+) - ch(F^-)]``, ``n = dim Sigma + 1``.

    ``gamma``/``gamma_deformed`` are tangent connection 1-forms on the wall
    (real antisymmetric matrices), ``F_plus``/``F_minus`` the one-sided gauge
    curvatures.  Only A-hat up to degree 4 is implemented, which covers walls
    of dimension at most 5 (bulk ``n <= 6``).
    """
    d = gamma.n
    if d > 5:
        raise FormError("A-hat transgression beyond degree 3 is not implemented")
    if d < 3:
        return 0.0
    if gamma.max_abs() == gamma_deformed.max_abs() == 0.0 or (gamma - gamma_deformed).max_abs() == 0.0:
        return 0.0
    T = transgression("ahat4", gamma, gamma_deformed)
    rank = next(iter(F_plus.comps.values())).shape[-1] if F_plus.matrix else 1
    chp = chern_character(F_plus, d - 1 if (d - 1) % 2 == 0 else d - 2, rank)
    chm = chern_character(F_minus, d - 1 if (d - 1) % 2 == 0 else d - 2, rank)
    total = 0.0
    for deg in chp:
        if 3 + deg != d:
            continue
        diff = chp[deg] - chm[deg]
        total += T.wedge(diff).integrate()
    return density_sign(d + 1) * float(np.real(total))


# ---------------------------------------------------------------- Pontryagin integrals


def _wall_grid_for(cfg: GaugeConfig, factor: int = 4):
    sup = np.zeros(cfg.wall_dim, dtype=int)
    for f in cfg.a_minus + cfg.b_jump:
        sup = np.maximum(sup, f.support())
    pts = [max(4, factor * int(k) + 4) for k in sup]
    return uniform_grid(cfg.geom.wall_lengths, pts)


def _density_on_slices(cfg: GaugeConfig, s: np.ndarray, grids):
    """``P = ch_{n/2}(F)`` integrated over the wall, on each transverse node ``s``."""
    n = cfg.geom.n
    F = field_strength(cfg, grids, s)
    shape = tuple(len(g) for g in grids) + (len(s),)
    form = FormField.from_antisymmetric(n, F.components, shape, matrix=True)
    ch = chern_character(form, n, cfg.rank)[n].comps.get(tuple(range(n)))
    # mean over the uniform wall grid times the wall volume
    axes = tuple(range(n - 1))
    return density_sign(n) * np.real(ch.mean(axis=axes)) * cfg.geom.wall_volume


def pontryagin_bulk_integral(cfg: GaugeConfig, nodes_per_panel: int = 24) -> float:
    """``int_{M minus Sigma} P`` for a flat metric; the jump slice is never sampled."""
    prof = cfg.profile
    grids = _wall_grid_for(cfg)
    s, w = prof.quadrature(nodes_per_panel, max_width=prof.period / 32)
    vals = _density_on_slices(cfg, s, grids)
    return float(w @ vals)


def cylinder_pontryagin(cfg: GaugeConfig, length: float, panels: int = 16, nodes: int = 24) -> float:
    """``int_C P`` over ``Sigma x [0, l]`` carrying ``A(s) = A^- + f(s/l) B``."""
    # a cylinder-only profile: evaluate field strength with g = f(s/l) on [0, l]
    f, fp, _ = make_profile_f()
    n = cfg.geom.n
    grids = _wall_grid_for(cfg)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, length, panels + 1)
    s = np.concatenate([0.5 * (b - a) * (x + 1) + a for a, b in zip(edges[:-1], edges[1:])])
    w = np.concatenate([0.5 * (b - a) * wx for a, b in zip(edges[:-1], edges[1:])])
    vals = np.zeros(len(s))
    shape = tuple(len(g) for g in grids)
    Am = [a.evaluate(grids) for a in cfg.a_minus]
    Bv = [b.evaluate(grids) for b in cfg.b_jump]
    dAm = {}
    dB = {}
    d = n - 1
    for a in range(d):
        for b in range(a + 1, d):
            dAm[(a, b)] = cfg.a_minus[b].derivative(a).evaluate(grids) - cfg.a_minus[a].derivative(b).evaluate(grids)
            dB[(a, b)] = cfg.b_jump[b].derivative(a).evaluate(grids) - cfg.b_jump[a].derivative(b).evaluate(grids)
    for j, sj in enumerate(s):
        g = float(f(np.array([sj / length]))[0])
        gp = float(fp(np.array([sj / length]))[0]) / length
        A = [am + g * bb for am, bb in zip(Am, Bv)]
        comps = {}
        for a in range(d):
            for b in range(a + 1, d):
                comps[(a, b)] = dAm[(a, b)] + g * dB[(a, b)] + A[a] @ A[b] - A[b] @ A[a]
            comps[(a, n - 1)] = -gp * Bv[a]
        form = FormField.from_antisymmetric(n, comps, shape, matrix=True)
        top = chern_character(form, n, cfg.rank)[n].comps.get(tuple(range(n)))
        vals[j] = density_sign(n) * float(np.real(top.mean())) * cfg.geom.wall_volume
    return float(w @ vals)


def closed_chern_integral(cfg: GaugeConfig) -> float:
    """``int_M ch_{n/2}(F)`` for a continuous connection (integer for a closed manifold)."""
    if not cfg.profile.continuous:
        raise FormError("closed-manifold integral needs a continuous connection")
    return pontryagin_bulk_integral(cfg)


def make_eta_delta(delta: float, eps1: float, eps: float):
    """``eta^delta(s) = s (1 - delta) + delta eta^1(s)`` with ``eta^1 = 0`` on ``[0, eps1]``, ``= s`` beyond ``eps``.

    Extended oddly to ``s < 0``; returns the map and its derivative.
    """
    if not 0 < eps1 < eps:
        raise FormError("need 0 < eps1 < eps")
    f, fp, _ = make_profile_f()

    def eta1(s):
        u = (np.abs(s) - eps1) / (eps - eps1)
        return np.sign(s) * np.abs(s) * f(u)

    def eta1p(s):
        a = np.abs(s)
        u = (a - eps1) / (eps - eps1)
        return f(u) + a * fp(u) / (eps - eps1)

    def eta(s):
        s = np.asarray(s, dtype=float)
        return s * (1 - delta) + delta * eta1(s)

    def etap(s):
        s = np.asarray(s, dtype=float)
        return (1 - delta) + delta * eta1p(s)

    return eta, etap


def deformed_collar_integral(cfg: GaugeConfig, delta: float, eps1: float, eps: float, nodes: int = 24, panels: int = 32) -> tuple[float, float]:
    """Collar integral of ``P`` before and after pulling back along ``eta^delta``.

    Both integrals run over ``[-eps, eps]`` minus the wall; they agree because
    ``P`` is a top form and ``eta^delta`` fixes the collar ends.
    """
    eta, etap = make_eta_delta(delta, eps1, eps)
    grids = _wall_grid_for(cfg)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    plain = 0.0
    pulled = 0.0
    for lo, hi in ((-eps, 0.0), (0.0, eps)):
        edges = np.linspace(lo, hi, panels + 1)
        u = np.concatenate([0.5 * (b - a) * (x + 1) + a for a, b in zip(edges[:-1], edges[1:])])
        w = np.concatenate([0.5 * (b - a) * wx for a, b in zip(edges[:-1], edges[1:])])
        plain += float(w @ _density_on_slices(cfg, u, grids))
        su = eta(u)
        keep = su != 0.0
        dens = np.zeros(len(u))
        dens[keep] = _density_on_slices(cfg, su[keep], grids)
        pulled += float(w @ (dens * etap(u)))
    return plain, pulled


# ---------------------------------------------------------------- synthetic data


def periodic_grid(n: int, points: int, length: float = 2 * np.pi):
    """Uniform grid ``points^n`` on ``T^n`` as (mesh coordinates, lengths, shape)."""
    axes = [np.arange(points) * length / points for _ in range(n)]
    return np.meshgrid(*axes, indexing="ij"), (length,) * n, (points,) * n


def random_connection(n: int, points: int, dim: int, kind: str = "u", kmax: int = 1, amplitude: float = 0.5, rng=None) -> FormField:
    """A trigonometric connection 1-form on ``T^n`` with band limit ``kmax``.

    ``kind="u"`` gives anti-Hermitian ``u(dim)`` values, ``kind="so"`` real
    antisymmetric ``so(dim)`` values.
    """
    rng = np.random.default_rng(rng)
    mesh, lengths, shape = periodic_grid(n, points)
    ks = np.array(np.meshgrid(*[np.arange(-kmax, kmax + 1)] * n, indexing="ij")).reshape(n, -1).T
    comps = {}
    for mu in range(n):
        val = np.zeros(shape + (dim, dim), dtype=complex)
        for k in ks:
            phase = np.exp(1j * sum(kk * x for kk, x in zip(k, mesh)))
            c = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            val += phase[..., None, None] * c * amplitude / np.sqrt(len(ks))
        if kind == "u":
            val = 0.5 * (val - np.conj(np.swapaxes(val, -1, -2)))
        elif kind == "so":
            re = np.real(val)
            val = (0.5 * (re - np.swapaxes(re, -1, -2))).astype(complex)
        else:
            raise FormError(f"unknown kind {kind}")
        comps[(mu,)] = val
    return FormField(n, 1, comps, shape, True, lengths)


def _constant_two_form(n, shape, lengths, entries, dim):
    comps = {}
    for I, m in entries.items():
        comps[I] = np.broadcast_to(np.asarray(m, dtype=complex), shape + (dim, dim)).copy()
    return FormField(n, 2, comps, shape, True, lengths)


def synthetic_correction_data(kind: str, points: int = 6, seed: int = 0):
    """Wall data ``(Gamma, Gamma^delta, F^+, F^-)`` for the correction-term checks.

    kinds: ``flat`` (``n = 4``, coinciding flat connections), ``n4`` (generic
    ``Gamma`` on ``T^3``), ``n6-traceless`` (``T^5`` with ``tr(F^+ - F^-) = 0``),
    ``n6-counter`` (``T^5`` with a Chern-Simons-type ``Gamma`` and abelian
    ``F^+ - F^-`` supported transversally to it).
    """
    rng = np.random.default_rng(seed)
    if kind == "flat":
        d, dim_t, rank = 3, 4, 1
        _, lengths, shape = periodic_grid(d, points)
        g = FormField.zero(d, 1, shape, dim_t, lengths=lengths)
        F = FormField.zero(d, 2, shape, rank, lengths=lengths)
        return g, g, F, F
    if kind == "n4":
        d = 3
        g0 = random_connection(d, points, 4, "so", rng=rng)
        g1 = random_connection(d, points, 4, "so", rng=rng)
        fp = curvature(random_connection(d, points, 2, "u", rng=rng))
        fm = curvature(random_connection(d, points, 2, "u", rng=rng))
        return g0, g1, fp, fm
    if kind == "n6-traceless":
        d = 5
        g0 = random_connection(d, points, 6, "so", rng=rng)
        g1 = random_connection(d, points, 6, "so", rng=rng)
        fm = curvature(random_connection(d, points, 2, "u", rng=rng))
        _, lengths, shape = periodic_grid(d, points)
        tl = np.diag([0.7j, -0.7j])
        fp = fm + _constant_two_form(d, shape, lengths, {(3, 4): tl, (0, 1): 0.5 * tl}, 2)
        return g0, g1, fp, fm
    if kind == "n6-counter":
        d = 5
        _, lengths, shape = periodic_grid(d, points)
        gens = []
        for a, b in ((1, 2), (2, 0), (0, 1)):
            T = np.zeros((6, 6))
            T[a, b], T[b, a] = 1.0, -1.0
            gens.append(T)
        comps = {(mu,): np.broadcast_to(0.4 * gens[mu], shape + (6, 6)).astype(complex) for mu in range(3)}
        comps.update({(mu,): np.zeros(shape + (6, 6), dtype=complex) for mu in (3, 4)})
        g1 = FormField(d, 1, comps, shape, True, lengths)
        g0 = FormField.zero(d, 1, shape, 6, lengths=lengths)
        fm = FormField.zero(d, 2, shape, 1, lengths=lengths)
        fp = _constant_two_form(d, shape, lengths, {(3, 4): [[0.8j]]}, 1)
        return g0, g1, fp, fm
    raise FormError(f"unknown synthetic kind {kind}")
