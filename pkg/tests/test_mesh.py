import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hweno.mesh import MeshError, build_mesh_1d, build_mesh_2d


def test_mesh_1d_examples():
    m = build_mesh_1d(0, 2, 10)
    assert m.dx == pytest.approx(0.2)
    assert m.centers[0] == pytest.approx(0.1)
    assert build_mesh_1d(-0.5, 0.5, 200).dx == pytest.approx(0.005)
    assert build_mesh_1d(0, 2 * math.pi, 4).dx == pytest.approx(1.5708, abs=1e-4)


def test_mesh_2d_examples():
    m = build_mesh_2d(0, 4, 0, 4, 80, 80)
    assert m.dx == pytest.approx(0.05) and m.dy == pytest.approx(0.05)
    m = build_mesh_2d(0, 3, 0, 1, 960, 320)
    assert m.dx == pytest.approx(0.003125) and m.dy == pytest.approx(0.003125)
    m = build_mesh_2d(0, 1, 0, 1, 3, 3)
    assert m.dx == pytest.approx(1 / 3) and m.dy == pytest.approx(1 / 3)


@pytest.mark.parametrize("args", [(1, 1, 10), (2, 1, 10), (0, 1, 2)])
def test_mesh_1d_invalid(args):
    with pytest.raises(MeshError):
        build_mesh_1d(*args)


@pytest.mark.parametrize("args", [(0, 1, 0, 0, 4, 4), (0, 1, 0, 1, 2, 4), (1, 0, 0, 1, 4, 4)])
def test_mesh_2d_invalid(args):
    with pytest.raises(MeshError):
        build_mesh_2d(*args)


@given(st.floats(-100, 100), st.floats(1e-3, 100), st.integers(3, 5000))
def test_widths_sum_to_extent(lo, width, n):
    m = build_mesh_1d(lo, lo + width, n)
    assert math.fsum([m.dx] * n) == pytest.approx(m.x_hi - m.x_lo, rel=1e-12)


@given(st.integers(3, 200))
def test_index_round_trip(n):
    m = build_mesh_1d(0.0, 1.0, n)
    assert m.to_padded(0) == m.n_ghost == 2
    i = np.arange(n)
    assert np.array_equal(m.to_interior(m.to_padded(i)), i)
    m2 = build_mesh_2d(0, 1, 0, 2, n, n + 1)
    assert m2.to_padded(0, 0) == (2, 2)
    assert m2.to_interior(*m2.to_padded(3, 1)) == (3, 1)
