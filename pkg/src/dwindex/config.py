"""Experiment configuration read from INI files.

Example::

    [geometry]
    n = 2
    lengths = 6.283185307179586, 6.283185307179586
    cutoffs = 24, 24

    [gauge]
    group = U(1)
    flux = 1
    a_minus.1 = 0: 0.2
    nu = 0.3                  # n = 2 shortcut for B_1 = i 2 pi nu / L_1

    [profile]
    kind = sharp

    [run]
    times = 0.5, 1.0, 2.0

    [tolerances]
    aps = 1e-6

    [checks]
    run = aps, lemma31, flow

Fourier tables list ``m_1,...,m_d: value`` entries separated by ``;``.  The
values are coefficients of the real function ``alpha`` with ``A = i alpha``
(abelian data only; non-abelian data go through the Python API).
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .gauge import GaugeConfig, Profile, abelian_field, assemble_gauge
from .geometry import build_torus

CHECKS = ("aps", "lemma31", "lemma32", "dertau", "flow", "ta")

DEFAULT_TOLERANCES = {
    "aps": 1e-6,
    "integrality": 1e-6,
    "lemma31": 1e-6,
    "dertau": 1e-3,
    "flow": 1e-5,
    "ta": 1e-9,
    "circle_eta": 1e-8,
    # heat trace within this of an integer at every delta of the sweep; below
    # delta = 1 the connection still jumps, so Galerkin convergence is slow there
    "sweep": 0.05,
}


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def parse_table(text: str, d: int) -> dict:
    table = {}
    for entry in str(text).split(";"):
        entry = entry.strip()
        if not entry:
            continue
        if ":" not in entry:
            raise ConfigError(f"Fourier entry {entry!r} lacks ':'")
        key, val = entry.split(":", 1)
        mode = tuple(int(x) for x in key.split(","))
        if len(mode) != d:
            raise ConfigError(f"mode {mode} does not have {d} components")
        table[mode] = complex(val.strip().replace(" ", ""))
    return table


def format_table(table: dict) -> str:
    parts = []
    for mode, val in sorted(table.items()):
        v = complex(val)
        txt = repr(v.real) if v.imag == 0 else repr(v).strip("()")
        parts.append(",".join(str(m) for m in mode) + ": " + txt)
    return "; ".join(parts)


@dataclass
class ProfileSpec:
    kind: str = "sharp"
    delta: float = 0.0
    delta0: float = 1.3
    ramp: float = 1.3
    return_start: float = 1.45
    return_end: float | None = None
    cylinder_length: float = 1.0

    def build(self, base_length: float, kind: str | None = None, delta: float | None = None) -> Profile:
        return Profile(
            kind or self.kind, base_length,
            delta=self.delta if delta is None else delta,
            delta0=self.delta0, ramp=self.ramp, return_start=self.return_start,
            return_end=self.return_end, cylinder_length=self.cylinder_length,
        )


@dataclass
class RunSpec:
    times: tuple = (0.5, 1.0, 2.0)
    quadrature_nodes: int = 64
    check_nodes: int = 96
    family_length: float = 1.0
    family_samples: int = 64
    wall_cutoff: int | None = None
    levels: int = 1200
    index_delta: float = 1.0
    deltas: tuple = tuple(round(0.1 * k, 1) for k in range(1, 11))
    transverse: bool = True


@dataclass
class ExperimentConfig:
    name: str
    n: int
    lengths: tuple
    cutoffs: tuple
    group: str = "U(1)"
    flux: int = 0
    a_minus: dict = field(default_factory=dict)  # direction (1-based) -> table
    b_jump: dict = field(default_factory=dict)
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    run: RunSpec = field(default_factory=RunSpec)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: tuple = ("aps",)

    def __post_init__(self):
        self.lengths = tuple(float(x) for x in self.lengths)
        self.cutoffs = tuple(int(x) for x in self.cutoffs)
        if self.n not in (2, 4):
            raise ConfigError("n must be 2 or 4")
        if len(self.lengths) != self.n or len(self.cutoffs) != self.n:
            raise ConfigError("lengths and cutoffs need one entry per dimension")
        if any(L <= 0 for L in self.lengths):
            raise ConfigError("lengths must be positive")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        bad = set(self.checks) - set(CHECKS)
        if bad:
            raise ConfigError(f"unknown checks {sorted(bad)}")
        d = self.n - 1
        for tables in (self.a_minus, self.b_jump):
            for a in tables:
                if not 1 <= int(a) <= d:
                    raise ConfigError(f"wall direction {a} out of range")

    # -- derived objects
    @property
    def wall_dim(self) -> int:
        return self.n - 1

    @property
    def wall_cutoffs(self) -> tuple:
        if self.run.wall_cutoff is not None:
            return (self.run.wall_cutoff,) * self.wall_dim
        return self.cutoffs[: self.wall_dim]

    def _fields(self, tables):
        geom = build_torus(self.n, self.lengths)
        L = geom.wall_lengths
        d = self.wall_dim
        return [abelian_field(L, tables.get(a + 1, {(0,) * d: 0.0})) for a in range(d)]

    def gauge(self, kind: str | None = None, delta: float | None = None) -> GaugeConfig:
        geom = build_torus(self.n, self.lengths)
        prof = self.profile.build(self.lengths[-1], kind, delta)
        return assemble_gauge(geom, self.group, self._fields(self.a_minus), self._fields(self.b_jump), prof, self.flux)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    # -- serialization
    def to_dict(self) -> dict:
        out = asdict(self)
        out["a_minus"] = {str(a): format_table(t) for a, t in sorted(self.a_minus.items())}
        out["b_jump"] = {str(a): format_table(t) for a, t in sorted(self.b_jump.items())}
        out["lengths"] = list(self.lengths)
        out["cutoffs"] = list(self.cutoffs)
        out["checks"] = list(self.checks)
        out["run"]["times"] = list(self.run.times)
        out["run"]["deltas"] = list(self.run.deltas)
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        cp["experiment"] = {"name": self.name}
        cp["geometry"] = {"n": str(self.n), "lengths": ", ".join(repr(x) for x in self.lengths), "cutoffs": ", ".join(map(str, self.cutoffs))}
        g = {"group": self.group, "flux": str(self.flux)}
        for a, t in sorted(self.a_minus.items()):
            g[f"a_minus.{a}"] = format_table(t).replace(";", "|")
        for a, t in sorted(self.b_jump.items()):
            g[f"b_jump.{a}"] = format_table(t).replace(";", "|")
        cp["gauge"] = g
        cp["profile"] = {k: repr(v) if isinstance(v, float) else str(v) for k, v in asdict(self.profile).items() if v is not None}
        run = asdict(self.run)
        cp["run"] = {k: ", ".join(map(repr, v)) if isinstance(v, (list, tuple)) else str(v) for k, v in run.items() if v is not None}
        cp["tolerances"] = {k: repr(v) for k, v in self.tolerances.items()}
        cp["checks"] = {"run": ", ".join(self.checks)}
        import io

        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _bool(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def load_config(source, name: str | None = None) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from an INI path or string."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    text = str(source)
    if "\n" in text or "[" in text:
        cp.read_string(text)
    else:
        with open(text) as fh:
            cp.read_file(fh)
    if "geometry" not in cp:
        raise ConfigError("missing [geometry] section")
    geo = cp["geometry"]
    n = int(geo["n"])
    lengths = _floats(geo.get("lengths", ", ".join([repr(2 * np.pi)] * n)))
    cutoffs = _ints(geo.get("cutoffs", ", ".join(["8"] * n)))
    gsec = cp["gauge"] if "gauge" in cp else {}
    d = n - 1
    a_minus, b_jump = {}, {}
    for key, val in gsec.items():
        val = val.replace("|", ";")
        if key.startswith("a_minus."):
            a_minus[int(key.split(".")[1])] = parse_table(val, d)
        elif key.startswith("b_jump."):
            b_jump[int(key.split(".")[1])] = parse_table(val, d)
    if "nu" in gsec:
        if n != 2:
            raise ConfigError("the nu shortcut is for n = 2")
        b_jump[1] = {(0,): 2 * np.pi * float(gsec["nu"]) / lengths[0]}
    if "alpha" in gsec:
        if n != 2:
            raise ConfigError("the alpha shortcut is for n = 2")
        a_minus[1] = {(0,): float(gsec["alpha"])}
    prof = ProfileSpec()
    if "profile" in cp:
        p = cp["profile"]
        prof = ProfileSpec(
            kind=p.get("kind", prof.kind),
            delta=float(p.get("delta", prof.delta)),
            delta0=float(p.get("delta0", prof.delta0)),
            ramp=float(p.get("ramp", prof.ramp)),
            return_start=float(p.get("return_start", prof.return_start)),
            return_end=float(p["return_end"]) if "return_end" in p else None,
            cylinder_length=float(p.get("cylinder_length", prof.cylinder_length)),
        )
    run = RunSpec()
    if "run" in cp:
        r = cp["run"]
        run = RunSpec(
            times=tuple(_floats(r.get("times", "0.5, 1.0, 2.0"))),
            quadrature_nodes=int(r.get("quadrature_nodes", run.quadrature_nodes)),
            check_nodes=int(r.get("check_nodes", run.check_nodes)),
            family_length=float(r.get("family_length", run.family_length)),
            family_samples=int(r.get("family_samples", run.family_samples)),
            wall_cutoff=int(r["wall_cutoff"]) if "wall_cutoff" in r else None,
            levels=int(r.get("levels", run.levels)),
            index_delta=float(r.get("index_delta", run.index_delta)),
            deltas=tuple(_floats(r["deltas"])) if "deltas" in r else run.deltas,
            transverse=_bool(r.get("transverse", "true")),
        )
    tol = dict(DEFAULT_TOLERANCES)
    if "tolerances" in cp:
        tol.update({k: float(v) for k, v in cp["tolerances"].items()})
    checks = ("aps",)
    if "checks" in cp:
        checks = tuple(c.strip() for c in cp["checks"].get("run", "aps").split(",") if c.strip())
    nm = name or (cp["experiment"].get("name") if "experiment" in cp else None) or "experiment"
    return ExperimentConfig(
        nm, n, lengths, cutoffs, gsec.get("group", "U(1)"), int(gsec.get("flux", 0)),
        a_minus, b_jump, prof, run, tol, checks,
    )


def n2_config(name: str, flux: int = 0, nu: float = 0.0, alpha: float = 0.2, cutoff: int = 24, checks=("aps",), length: float = 2 * np.pi, **run) -> ExperimentConfig:
    """Abelian ``T^2`` experiment with a constant wall jump ``B_1 = i 2 pi nu / L``."""
    L = float(length)
    return ExperimentConfig(
        name, 2, (L, L), (cutoff, cutoff), "U(1)", flux,
        {1: {(0,): alpha}}, {1: {(0,): 2 * np.pi * nu / L}},
        ProfileSpec(), RunSpec(**run), dict(DEFAULT_TOLERANCES), tuple(checks),
    )


def n4_config(name: str = "t4-wall", a: float = 0.6, b: float = 0.5, c: float = 0.3, cutoffs=(6, 2, 2, 12), checks=("aps",), **run) -> ExperimentConfig:
    """Abelian ``T^4`` with ``A^-_2 = i a cos x1``, ``A^-_3 = i c`` and ``B_3 = i b sin x1``."""
    L = 2 * np.pi
    a_minus = {2: {(1, 0, 0): 0.5 * a, (-1, 0, 0): 0.5 * a}}
    if c:
        a_minus[3] = {(0, 0, 0): c}
    b_jump = {3: {(1, 0, 0): -0.5j * b, (-1, 0, 0): 0.5j * b}}
    run.setdefault("wall_cutoff", 16)
    return ExperimentConfig(
        name, 4, (L,) * 4, tuple(cutoffs), "U(1)", 0, a_minus, b_jump,
        ProfileSpec(), RunSpec(**run), dict(DEFAULT_TOLERANCES, aps=1e-5), tuple(checks),
    )
