import numpy as np
import pytest
from hypothesis import given, strategies as st

from occutime import ConfigError, build_grid


def test_basic_layout():
    g = build_grid(2.0, 8, 4)
    assert g.coarse_step == pytest.approx(0.25)
    assert g.fine_step == pytest.approx(0.0625)
    assert g.fine_count == 32
    assert len(g.coarse_times) == 9
    assert len(g.fine_times) == 33
    assert g.coarse_times[-1] == pytest.approx(2.0)


def test_indexing_floor_guard():
    g = build_grid(1.0, 10, 1)
    # floating arithmetic places 0.3 a hair under 3 * 0.1; the guard
    # must still land on index 3
    assert g.coarse_index(0.3) == 3
    assert g.coarse_index(1.0) == 10
    assert g.coarse_index(0.0999999) == 0


@given(st.integers(1, 200), st.integers(1, 16))
def test_fine_grid_refines_coarse(n, m):
    g = build_grid(1.0, n, m)
    assert np.allclose(g.fine_times[::m], g.coarse_times)


@pytest.mark.parametrize("args", [(0.0, 4, 1), (-1.0, 4, 1), (1.0, 0, 1),
                                  (1.0, 4, 0), (1.0, -4, 2)])
def test_invalid_parameters(args):
    with pytest.raises(ConfigError):
        build_grid(*args)


def test_index_out_of_range():
    g = build_grid(1.0, 4, 2)
    with pytest.raises(ConfigError):
        g.coarse_index(1.5)
    with pytest.raises(ConfigError):
        g.fine_index(-0.1)
