import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dwindex.geometry import (
    GeometryError,
    WallPatch,
    build_modes,
    build_torus,
    build_wall_modes,
    gaussian_coordinate,
    wrap_transverse,
)


def test_torus_basic_properties():
    g = build_torus(4, [1.0, 2.0, 3.0, 4.0])
    assert g.transverse_index == 3
    assert g.transverse_length == 4.0
    assert g.wall_lengths == (1.0, 2.0, 3.0)
    assert g.volume == pytest.approx(24.0)
    assert g.wall_volume == pytest.approx(6.0)
    assert np.all(g.extrinsic_curvature == 0)
    assert g.orientation == 1


@pytest.mark.parametrize("n, lengths", [(3, [1, 1, 1]), (2, [1.0]), (2, [1.0, -2.0]), (2, [1.0, np.inf])])
def test_torus_rejects_bad_input(n, lengths):
    with pytest.raises(GeometryError):
        build_torus(n, lengths)


def test_mode_counts_and_order():
    g = build_torus(2, [2 * np.pi, 2 * np.pi])
    modes = build_modes(g, [2, 1])
    assert len(modes) == 5 * 3
    assert tuple(modes.modes[0]) == (-2, -1)
    assert tuple(modes.modes[-1]) == (2, 1)
    assert np.allclose(modes.momenta, modes.modes)
    wall = build_wall_modes(g, [3])
    assert len(wall) == 7
    with pytest.raises(GeometryError):
        build_modes(g, [1])
    with pytest.raises(GeometryError):
        build_wall_modes(g, [-1])


@given(st.floats(-50, 50), st.floats(0.5, 10))
def test_wrap_is_periodic_and_centred(s, L):
    w = float(wrap_transverse(s, L))
    assert -L / 2 <= w <= L / 2 + 1e-12
    assert float(wrap_transverse(s + L, L)) == pytest.approx(w, abs=1e-9)


def test_gaussian_coordinate_signs():
    g = build_torus(2, [1.0, 4.0])
    assert gaussian_coordinate(g, [0.3, 0.5]) == pytest.approx(0.5)
    assert gaussian_coordinate(g, [0.3, 3.5]) == pytest.approx(-0.5)


def test_wall_patch_validation():
    g = build_torus(2, [1.0, 4.0])
    assert WallPatch(0.5, 1.0).validate(g).half_width == 0.5
    with pytest.raises(GeometryError):
        WallPatch(2.5, 1.0).validate(g)
    with pytest.raises(GeometryError):
        WallPatch(0.5, 0.0).validate(g)
