"""Connections with a jump across the wall, transverse profiles, field strengths.

Gauge potentials are anti-Hermitian: for U(1), ``A = i alpha`` with ``alpha``
real.  Along the wall they are stored as truncated Fourier data; the
transverse dependence is a closed-form profile ``g(s)`` so that

    A_a(x, s) = A_a^-(x) + g(s) B_a(x)            (axial gauge, A_s = 0)

with ``g = 0`` on the ``-`` side of the wall and ``g = 1`` on the ``+`` side.
On the torus ``g`` returns smoothly to 0 inside the bulk of the ``+`` arc so
that the connection is continuous at the antipodal slice.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .geometry import TorusGeometry, wrap_transverse

_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)


class GaugeError(ValueError):
    pass


def _bump(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    m = (v > 0) & (v < 1)
    vm = v[m]
    out[m] = np.exp(-1.0 / (vm * (1.0 - vm)))
    return out


def _bump_integral(u, panels=8):
    # int_0^u of the bump by composite Gauss-Legendre; exact to roundoff for u <= 1/2
    u = np.asarray(u, dtype=float)
    tot = np.zeros_like(u)
    for j in range(panels):
        a = u * j / panels
        b = u * (j + 1) / panels
        nodes = 0.5 * (b - a)[..., None] * (_GL_X + 1) + a[..., None]
        tot = tot + 0.5 * (b - a) * (_bump(nodes) @ _GL_W)
    return tot


# the bump is symmetric about 1/2
_BUMP_NORM = 2.0 * float(_bump_integral(np.array(0.5)))


def smear(u):
    """Normalized bump integral: 0 for u <= 0, 1 for u >= 1, flat to all orders at both ends."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    lo = u <= 0.5
    out = np.empty_like(u)
    out[lo] = _bump_integral(u[lo]) / _BUMP_NORM
    out[~lo] = 1.0 - _bump_integral(1.0 - u[~lo]) / _BUMP_NORM
    return out


def smear_deriv(u):
    return _bump(u) / _BUMP_NORM


def smear_deriv2(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    m = (u > 0) & (u < 1)
    v = u[m]
    out[m] = _bump(v) * (1 - 2 * v) / (v * (1 - v)) ** 2 / _BUMP_NORM
    return out


@dataclass(frozen=True)
class Profile:
    """Transverse profile ``g(s)`` on a circle of length ``period``.

    kind:
      ``sharp``     -- unit step at ``s = 0``
      ``smoothed``  -- the interpolating family with one-sided values
                       ``g(-0) = delta/2``, ``g(+0) = 1 - delta/2``
      ``cylinder``  -- a cylinder ``[0, l]`` pasted at the wall carrying ``f(s/l)``;
                       the circle is then ``base_length + l`` long
    """

    kind: str
    base_length: float
    delta: float = 0.0
    delta0: float = 0.8
    ramp: float = 1.0
    return_start: float = 1.2
    return_end: float | None = None
    cylinder_length: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sharp", "smoothed", "cylinder"):
            raise GaugeError(f"unknown profile kind {self.kind!r}")
        if self.return_end is None:
            object.__setattr__(self, "return_end", self.base_length / 2)
        if not 0.0 <= self.delta <= 1.0:
            raise GaugeError("delta must lie in [0, 1]")
        if self.kind == "sharp":
            object.__setattr__(self, "delta", 0.0)
        half = self.base_length / 2
        if not 0 < self.delta0 < half:
            raise GaugeError("delta0 must lie in (0, L/2)")
        if not 0 < self.return_start < self.return_end <= half:
            raise GaugeError("return ramp must satisfy 0 < start < end <= L/2")
        if self.kind == "smoothed" and self.delta * self.ramp > self.return_start:
            raise GaugeError("wall ramp overlaps the return ramp")
        if self.delta0 > half - 1e-12 and self.return_end >= half:
            raise GaugeError("left ramp reaches the antipodal slice")
        if self.cylinder_length <= 0:
            raise GaugeError("cylinder length must be positive")

    @property
    def period(self) -> float:
        if self.kind == "cylinder":
            return self.base_length + self.cylinder_length
        return self.base_length

    @property
    def continuous(self) -> bool:
        return self.kind == "cylinder" or self.delta == 1.0

    @property
    def limit_minus(self) -> float:
        return 0.0 if self.kind == "cylinder" else self.delta / 2

    @property
    def limit_plus(self) -> float:
        return 0.0 if self.kind == "cylinder" else 1.0 - self.delta / 2

    @property
    def jump(self) -> float:
        return self.limit_plus - self.limit_minus

    def wrap(self, s):
        """Coordinate in ``(-L/2, period - L/2]``."""
        center = (self.period - self.base_length) / 2
        return wrap_transverse(np.asarray(s, dtype=float) - center, self.period) + center

    def _plus_side(self, s, order):
        # unit plateau then the return ramp back to zero
        rs, re = self.return_start, self.return_end
        u = (s - rs) / (re - rs)
        if order == 0:
            return np.where(s < rs, 1.0, 1.0 - smear(u))
        if order == 1:
            return -smear_deriv(u) / (re - rs)
        return -smear_deriv2(u) / (re - rs) ** 2

    def _eval(self, s, order):
        u = self.wrap(s)
        out = np.zeros_like(u)
        if self.kind == "cylinder":
            l = self.cylinder_length
            cyl = (u >= 0) & (u <= l)
            if order == 0:
                out[cyl] = smear(u[cyl] / l)
            elif order == 1:
                out[cyl] = smear_deriv(u[cyl] / l) / l
            else:
                out[cyl] = smear_deriv2(u[cyl] / l) / l**2
            plus = u > l
            out[plus] = self._plus_side(u[plus] - l, order)
            return out
        d, d0, w = self.delta, self.delta0, self.ramp
        neg = u < 0
        v = (u[neg] + d0) / d0
        if order == 0:
            out[neg] = 0.5 * d * smear(v)
        elif order == 1:
            out[neg] = 0.5 * d * smear_deriv(v) / d0
        else:
            out[neg] = 0.5 * d * smear_deriv2(v) / d0**2
        pos = u > 0
        up = u[pos]
        vals = self._plus_side(up, order)
        if d > 0:
            inner = up < d * w
            x = up[inner] / (d * w)
            if order == 0:
                vals[inner] = 1 - 0.5 * d + 0.5 * d * smear(x)
            elif order == 1:
                vals[inner] = 0.5 * d * smear_deriv(x) / (d * w)
            else:
                vals[inner] = 0.5 * d * smear_deriv2(x) / (d * w) ** 2
        out[pos] = vals
        zero = u == 0
        if order == 0:
            out[zero] = 0.5 * (self.limit_minus + self.limit_plus)
        return out

    def value(self, s):
        return self._eval(s, 0)

    def deriv(self, s):
        return self._eval(s, 1)

    def deriv2(self, s):
        return self._eval(s, 2)

    def breakpoints(self) -> np.ndarray:
        """Points (in the wrapped coordinate) where g may fail to be smooth, sorted."""
        half = self.base_length / 2
        if self.kind == "cylinder":
            l = self.cylinder_length
            pts = [-half, 0.0, l, l + self.return_start, l + self.return_end, self.period - half]
        else:
            pts = [-half, 0.0, self.return_start, self.return_end, half]
            if self.delta > 0:
                pts += [-self.delta0, self.delta * self.ramp]
        return np.unique(np.array(pts))

    def jump_points(self) -> np.ndarray:
        if self.kind == "cylinder" or self.delta == 1.0:
            return np.zeros(0)
        return np.zeros(1)

    def panels(self, max_width: float) -> np.ndarray:
        """Panel edges covering one period, refined to ``max_width``."""
        bp = self.breakpoints()
        edges = [bp[0]]
        for a, b in zip(bp[:-1], bp[1:]):
            k = max(1, int(np.ceil((b - a) / max_width)))
            edges.extend(np.linspace(a, b, k + 1)[1:])
        return np.array(edges)

    def quadrature(self, nodes_per_panel: int = 20, max_width: float | None = None):
        """Composite Gauss-Legendre nodes/weights over one period, respecting breakpoints."""
        if max_width is None:
            max_width = self.period / 16
        edges = self.panels(max_width)
        x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
        a, b = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (b - a) * (x + 1) + a).ravel()
        weights = (0.5 * (b - a) * w).ravel()
        return nodes, weights

    def fourier(self, kmax: int) -> np.ndarray:
        """Coefficients ``c_m``, ``|m| <= kmax``, with ``g(s) = sum c_m exp(2 pi i m s / period)``."""
        nodes, weights = self.quadrature(24, max_width=self.period / max(16, 2 * kmax))
        m = np.arange(-kmax, kmax + 1)
        phase = np.exp(-2j * np.pi * np.outer(m, nodes) / self.period)
        return phase @ (weights * self.value(nodes)) / self.period


def make_profile_f():
    """The smearing function and its first two derivatives as callables."""
    return smear, smear_deriv, smear_deriv2


def make_chi_delta(delta: float, delta0: float, base_length: float, ramp: float = 1.0, **kw) -> Profile:
    if not 0.0 <= delta <= 1.0:
        raise GaugeError("delta must lie in [0, 1]")
    return Profile("smoothed", base_length, delta=delta, delta0=delta0, ramp=ramp, **kw)


@dataclass(frozen=True)
class FourierField:
    """Matrix-valued field on ``T^d``: ``sum_q c_q exp(i p_q . x)``."""

    modes: np.ndarray
    coeffs: np.ndarray
    lengths: tuple[float, ...]

    @classmethod
    def zero(cls, lengths, rank: int = 1) -> "FourierField":
        d = len(lengths)
        return cls(np.zeros((0, d), dtype=int), np.zeros((0, rank, rank), dtype=complex), tuple(lengths))

    @classmethod
    def from_dict(cls, table: dict, lengths, rank: int = 1) -> "FourierField":
        """``table`` maps integer mode tuples to scalars (times identity) or rank x rank matrices."""
        d = len(lengths)
        modes, coeffs = [], []
        for k, v in table.items():
            k = tuple(int(x) for x in np.atleast_1d(k))
            if len(k) != d:
                raise GaugeError(f"mode {k} has wrong length, expected {d}")
            v = np.asarray(v, dtype=complex)
            if v.ndim == 0:
                v = v * np.eye(rank)
            if v.shape != (rank, rank):
                raise GaugeError(f"coefficient for mode {k} has shape {v.shape}")
            modes.append(k)
            coeffs.append(v)
        if not modes:
            return cls.zero(lengths, rank)
        return cls(np.array(modes, dtype=int).reshape(-1, d), np.array(coeffs), tuple(lengths)).simplified()

    @property
    def rank(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def dim(self) -> int:
        return len(self.lengths)

    def simplified(self) -> "FourierField":
        table = {}
        for k, c in zip(map(tuple, self.modes.tolist()), self.coeffs):
            table[k] = table.get(k, 0) + c
        keys = [k for k in sorted(table) if np.abs(table[k]).max() > 0]
        if not keys:
            return FourierField.zero(self.lengths, self.rank)
        return FourierField(np.array(keys, dtype=int).reshape(-1, self.dim), np.array([table[k] for k in keys]), self.lengths)

    def as_dict(self) -> dict:
        return {tuple(k): c for k, c in zip(self.modes.tolist(), self.coeffs)}

    def __add__(self, other):
        return FourierField(
            np.concatenate([self.modes, other.modes]), np.concatenate([self.coeffs, other.coeffs]), self.lengths
        ).simplified()

    def scale(self, c) -> "FourierField":
        return FourierField(self.modes, self.coeffs * c, self.lengths)

    def anti_hermitian_residual(self) -> float:
        tab = self.as_dict()
        res = 0.0
        for k, c in tab.items():
            partner = tab.get(tuple(-x for x in k), np.zeros_like(c))
            res = max(res, float(np.abs(partner + c.conj().T).max()))
        return res

    def hermitian_residual(self) -> float:
        tab = self.as_dict()
        res = 0.0
        for k, c in tab.items():
            partner = tab.get(tuple(-x for x in k), np.zeros_like(c))
            res = max(res, float(np.abs(partner - c.conj().T).max()))
        return res

    def support(self) -> np.ndarray:
        return np.abs(self.modes).max(axis=0) if len(self.modes) else np.zeros(self.dim, dtype=int)

    def momenta(self) -> np.ndarray:
        return 2 * np.pi * self.modes / np.asarray(self.lengths)

    def derivative(self, a: int) -> "FourierField":
        return FourierField(self.modes, self.coeffs * (1j * self.momenta()[:, a])[:, None, None], self.lengths)

    def mean(self) -> np.ndarray:
        return self.as_dict().get(tuple([0] * self.dim), np.zeros((self.rank, self.rank), dtype=complex))

    def evaluate(self, grids) -> np.ndarray:
        """Values on the tensor grid ``grids`` (one 1D array per direction); shape grid + (N, N)."""
        shape = tuple(len(g) for g in grids)
        out = np.zeros(shape + (self.rank, self.rank), dtype=complex)
        if len(self.modes) == 0:
            return out
        for k, c in zip(self.modes, self.coeffs):
            ph = np.ones((), dtype=complex)
            for a, g in enumerate(grids):
                ph = np.multiply.outer(ph, np.exp(2j * np.pi * k[a] * np.asarray(g) / self.lengths[a]))
            out += ph[..., None, None] * c
        return out


def uniform_grid(lengths, points) -> list[np.ndarray]:
    return [np.arange(p) * (L / p) for L, p in zip(lengths, points)]


@dataclass(frozen=True)
class GaugeConfig:
    geom: TorusGeometry
    rank: int
    a_minus: tuple[FourierField, ...]
    b_jump: tuple[FourierField, ...]
    profile: Profile
    flux: int = 0
    axial: bool = True

    @property
    def group(self) -> str:
        return f"U({self.rank})"

    @property
    def wall_dim(self) -> int:
        return self.geom.n - 1

    @cached_property
    def a_plus(self) -> tuple[FourierField, ...]:
        return tuple(m + b for m, b in zip(self.a_minus, self.b_jump))

    @property
    def landau_slope(self) -> float:
        """Slope ``b`` of the background ``A_1 = i b s``; total flux ``2 pi Q``."""
        return 2 * np.pi * self.flux / self.geom.volume

    @property
    def transverse_length(self) -> float:
        return self.profile.period

    @property
    def bulk_geometry(self) -> TorusGeometry:
        return self.geom.with_transverse_length(self.profile.period)

    def with_profile(self, profile: Profile) -> "GaugeConfig":
        return replace(self, profile=profile)

    def is_abelian(self) -> bool:
        return self.rank == 1

    def sigma_constant(self) -> bool:
        return all(np.all(f.modes == 0) for f in self.a_minus + self.b_jump)

    def jump_residual(self) -> float:
        """``A^+ - A^-`` recomputed from the stored limits against ``B``."""
        res = 0.0
        for ap, am, b in zip(self.a_plus, self.a_minus, self.b_jump):
            diff = ap + am.scale(-1) + b.scale(-1)
            res = max(res, float(np.abs(diff.coeffs).max()) if len(diff.modes) else 0.0)
        return res

    def wall_potential(self, grids, s):
        """``A_a`` on the tensor grid ``grids x {s}``; shape (d,) + grid + (len(s), N, N)."""
        s = np.asarray(s, dtype=float)
        g = self.profile.value(s)
        out = []
        for a, (am, b) in enumerate(zip(self.a_minus, self.b_jump)):
            vm = am.evaluate(grids)[..., None, :, :]
            vb = b.evaluate(grids)[..., None, :, :]
            val = vm + g[:, None, None] * vb
            if a == 0 and self.flux:
                val = val + 1j * self.landau_slope * s[:, None, None] * np.eye(self.rank)
            out.append(val)
        return np.array(out)


def assemble_gauge(geom, group, a_minus, b_jump, profile: Profile, flux: int = 0) -> GaugeConfig:
    """Validate and bundle the gauge data.

    ``group`` is ``"U(N)"`` or an integer rank.  ``a_minus`` / ``b_jump`` are
    sequences (one per wall direction) of :class:`FourierField` holding the
    anti-Hermitian potentials.
    """
    rank = _parse_group(group)
    d = geom.n - 1
    a_minus = tuple(a_minus) if a_minus is not None else tuple(FourierField.zero(geom.wall_lengths, rank) for _ in range(d))
    b_jump = tuple(b_jump) if b_jump is not None else tuple(FourierField.zero(geom.wall_lengths, rank) for _ in range(d))
    if len(a_minus) != d or len(b_jump) != d:
        raise GaugeError(f"need {d} wall components for A^- and B")
    for f in a_minus + b_jump:
        if f.rank != rank:
            raise GaugeError("field rank does not match the structure group")
        if f.dim != d:
            raise GaugeError("field does not live on the wall")
        if f.anti_hermitian_residual() > 1e-12:
            raise GaugeError("gauge data must be anti-Hermitian")
    if abs(profile.base_length - geom.transverse_length) > 1e-12:
        raise GaugeError("profile built for a different transverse length")
    if flux:
        if geom.n != 2 or rank != 1:
            raise GaugeError("background flux is supported for abelian n = 2 only")
    return GaugeConfig(geom, rank, a_minus, b_jump, profile, int(flux))


def _parse_group(group) -> int:
    if isinstance(group, (int, np.integer)):
        rank = int(group)
    else:
        g = str(group).strip().upper().replace(" ", "")
        if not (g.startswith("U(") and g.endswith(")")):
            raise GaugeError(f"unsupported group {group!r}")
        rank = int(g[2:-1])
    if not 1 <= rank <= 3:
        raise GaugeError("only U(N) with N <= 3 is supported")
    return rank


def abelian_field(lengths, table: dict) -> FourierField:
    """U(1) potential ``A = i alpha`` from the Fourier table of real ``alpha``."""
    f = FourierField.from_dict(table, lengths, 1)
    if f.hermitian_residual() > 1e-12:
        raise GaugeError("alpha must be real (Hermitian Fourier table)")
    return f.scale(1j)


@dataclass(frozen=True)
class FieldStrength:
    """Components ``F_{mu nu}`` (mu < nu) on a tensor grid ``wall grids x s``."""

    n: int
    components: dict = field(repr=False)
    grids: tuple = field(repr=False)
    s: np.ndarray = field(repr=False)
    wall_minus: dict = field(default=None, repr=False)
    wall_plus: dict = field(default=None, repr=False)

    def component(self, mu, nu):
        if mu == nu:
            return np.zeros_like(next(iter(self.components.values())))
        if mu < nu:
            return self.components[(mu, nu)]
        return -self.components[(nu, mu)]


def _wall_curvature(fields, grids):
    # F_ab of a wall connection given as Fourier data
    d = len(fields)
    vals = [f.evaluate(grids) for f in fields]
    out = {}
    for a in range(d):
        for b in range(a + 1, d):
            dab = fields[b].derivative(a).evaluate(grids) - fields[a].derivative(b).evaluate(grids)
            out[(a, b)] = dab + vals[a] @ vals[b] - vals[b] @ vals[a]
    return out


def field_strength(cfg: GaugeConfig, grids, s) -> FieldStrength:
    """Field strength at ``grids x s`` with the transverse derivative taken from the profile."""
    s = np.asarray(s, dtype=float)
    prof = cfg.profile
    if not prof.continuous:
        if np.any(np.isclose(prof.wrap(s), 0.0, atol=1e-14)):
            raise GaugeError("field strength requested on the jump slice")
    d = cfg.wall_dim
    n = cfg.geom.n
    g = prof.value(s)
    dg = prof.deriv(s)
    A = cfg.wall_potential(grids, s)
    comps = {}
    for a in range(d):
        for b in range(a + 1, d):
            dab = (cfg.a_minus[b].derivative(a).evaluate(grids) - cfg.a_minus[a].derivative(b).evaluate(grids))[
                ..., None, :, :
            ]
            dbb = (cfg.b_jump[b].derivative(a).evaluate(grids) - cfg.b_jump[a].derivative(b).evaluate(grids))[
                ..., None, :, :
            ]
            comps[(a, b)] = dab + g[:, None, None] * dbb + A[a] @ A[b] - A[b] @ A[a]
    for a in range(d):
        # F_{a s} = d_a A_s - d_s A_a, with A_s = 0
        val = -dg[:, None, None] * cfg.b_jump[a].evaluate(grids)[..., None, :, :]
        if a == 0 and cfg.flux:
            val = val - 1j * cfg.landau_slope * np.eye(cfg.rank)
        comps[(a, n - 1)] = val
    minus = _wall_curvature(cfg.a_minus, grids)
    plus = _wall_curvature(cfg.a_plus, grids)
    return FieldStrength(n, comps, tuple(grids), s, minus, plus)
