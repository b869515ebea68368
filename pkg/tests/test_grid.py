import numpy as np
import pytest

from bgkslab.grid import SpatialGrid, TemperatureProfile, hat_pairs, hat_values


@pytest.mark.parametrize("n,grading", [(8, 1.0), (32, 2.0), (64, 2.0), (100, 3.0)])
def test_graded_grid_invariants(n, grading):
    grid = SpatialGrid.graded(n, grading)
    assert grid.n == n
    assert np.all(np.diff(grid.nodes) > 0.0)
    assert grid.nodes[0] > 0.0 and grid.nodes[-1] < 1.0
    assert np.all(grid.weights > 0.0)
    assert abs(grid.weights.sum() - 1.0) <= 1e-12


def test_graded_grid_concentrates_at_walls():
    grid = SpatialGrid.graded(64, 2.0)
    assert grid.weights[0] < grid.weights[32] / 10.0
    assert grid.weights[-1] < grid.weights[32] / 10.0


def test_grid_validation():
    with pytest.raises(ValueError):
        SpatialGrid(nodes=np.array([0.2, 0.1, 0.5, 0.7]),
                    weights=np.full(4, 0.25),
                    edges=np.linspace(0, 1, 5))
    with pytest.raises(ValueError):
        SpatialGrid.graded(64, 0.5)


def test_hat_pairs_partition_of_unity():
    grid = SpatialGrid.graded(16)
    y = np.linspace(0.001, 0.999, 200)
    idx, w = hat_pairs(grid.nodes, y)
    assert np.allclose(w.sum(axis=1), 1.0)
    assert np.all(w >= 0.0)


def test_hat_values_matches_interp():
    grid = SpatialGrid.graded(16)
    vals = np.sin(grid.nodes)
    y = np.linspace(0.0, 1.0, 57)
    idx, w = hat_pairs(grid.nodes, y)
    via_pairs = w[:, 0] * vals[idx[:, 0]] + w[:, 1] * vals[idx[:, 1]]
    assert np.allclose(via_pairs, hat_values(grid.nodes, vals, y), atol=1e-15)


def test_profile_interpolation_and_band():
    grid = SpatialGrid.graded(32)
    profile = TemperatureProfile(grid=grid, values=100.0 + 50.0 * grid.nodes)
    assert profile(grid.nodes[5]) == pytest.approx(profile.values[5])
    assert profile.within_band(100.0, 150.0)
    assert not profile.within_band(110.0, 150.0)
    clipped, n = profile.clipped(110.0, 150.0)
    assert n > 0
    assert clipped.values.min() >= 110.0


def test_profile_rejects_nonpositive():
    grid = SpatialGrid.graded(8)
    with pytest.raises(ValueError):
        TemperatureProfile(grid=grid, values=np.zeros(8))
