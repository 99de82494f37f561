"""Flat torus backgrounds with a codimension-one wall at ``s = 0``.

The last coordinate ``x^n`` is the transverse (Gaussian) coordinate ``s``;
the first ``n - 1`` coordinates parametrize the wall.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGeometry:
    n: int
    lengths: tuple[float, ...]
    orientation: int = 1
    # extrinsic curvature of the wall; flat embedding only
    extrinsic_curvature: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.extrinsic_curvature is None:
            d = self.n - 1
            object.__setattr__(self, "extrinsic_curvature", np.zeros((d, d)))

    @property
    def transverse_index(self) -> int:
        return self.n - 1

    @property
    def transverse_length(self) -> float:
        return self.lengths[-1]

    @property
    def wall_lengths(self) -> tuple[float, ...]:
        return self.lengths[:-1]

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def wall_volume(self) -> float:
        return float(np.prod(self.wall_lengths))

    @property
    def metric(self) -> np.ndarray:
        return np.eye(self.n)

    def with_transverse_length(self, length: float) -> "TorusGeometry":
        return build_torus(self.n, list(self.lengths[:-1]) + [length])


def build_torus(n: int, lengths) -> TorusGeometry:
    """Flat torus ``T^n`` with the wall at ``s = 0``; ``n`` must be 2 or 4."""
    if n not in (2, 4):
        raise GeometryError(f"dimension must be 2 or 4, got {n}")
    lengths = tuple(float(x) for x in lengths)
    if len(lengths) != n:
        raise GeometryError(f"expected {n} side lengths, got {len(lengths)}")
    if any(not np.isfinite(x) or x <= 0 for x in lengths):
        raise GeometryError("side lengths must be positive")
    return TorusGeometry(n, lengths)


@dataclass(frozen=True)
class FourierModeSet:
    cutoffs: tuple[int, ...]
    lengths: tuple[float, ...]
    modes: np.ndarray = field(repr=False, compare=False)

    @property
    def momenta(self) -> np.ndarray:
        return 2 * np.pi * self.modes / np.asarray(self.lengths)

    def __len__(self):
        return len(self.modes)

    def index(self) -> dict:
        return {tuple(k): i for i, k in enumerate(self.modes.tolist())}


def mode_grid(cutoffs) -> np.ndarray:
    """All integer vectors with ``|k_i| <= cutoffs[i]``, lexicographic order."""
    axes = [range(-c, c + 1) for c in cutoffs]
    if not axes:
        return np.zeros((1, 0), dtype=int)
    return np.array(list(product(*axes)), dtype=int).reshape(-1, len(cutoffs))


def build_modes(geom: TorusGeometry, cutoffs) -> FourierModeSet:
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != geom.n:
        raise GeometryError(f"expected {geom.n} cutoffs, got {len(cutoffs)}")
    if any(c < 0 for c in cutoffs):
        raise GeometryError("cutoffs must be nonnegative")
    return FourierModeSet(cutoffs, geom.lengths, mode_grid(cutoffs))


def build_wall_modes(geom: TorusGeometry, cutoffs) -> FourierModeSet:
    """Fourier modes on the wall ``Sigma = T^{n-1}``."""
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != geom.n - 1:
        raise GeometryError(f"expected {geom.n - 1} wall cutoffs, got {len(cutoffs)}")
    if any(c < 0 for c in cutoffs):
        raise GeometryError("cutoffs must be nonnegative")
    return FourierModeSet(cutoffs, geom.wall_lengths, mode_grid(cutoffs))


def wrap_transverse(s, length: float):
    """Map ``s`` into ``(-length/2, length/2]``."""
    s = np.asarray(s, dtype=float)
    w = s - length * np.floor(s / length + 0.5)
    # floor puts length/2 at -length/2; move it back
    return np.where(np.isclose(w, -length / 2, rtol=0, atol=1e-15 * length), length / 2, w)


def gaussian_coordinate(geom: TorusGeometry, point) -> float:
    """Signed distance of ``point`` to the wall, positive on the ``+`` side."""
    point = np.asarray(point, dtype=float)
    return float(wrap_transverse(point[geom.transverse_index], geom.transverse_length))


@dataclass(frozen=True)
class WallPatch:
    """Product-structure collar ``Sigma x [-eps, eps]`` and pasted cylinder length."""

    half_width: float
    cylinder_length: float

    def validate(self, geom: TorusGeometry) -> "WallPatch":
        if not 0 < self.half_width < geom.transverse_length / 2:
            raise GeometryError("patch half-width must lie in (0, L_n/2)")
        if self.cylinder_length <= 0:
            raise GeometryError("cylinder length must be positive")
        return self
