import numpy as np
import pytest

from bgkslab import SpatialGrid, TemperatureProfile, WallTemperatures, find_ness
from bgkslab.linear_bgk import solve_linear_steady_state


@pytest.fixture(scope="session")
def equilibrium_solution():
    walls = WallTemperatures(1.0, 1.0, 1.0)
    grid = SpatialGrid.graded(64)
    profile = TemperatureProfile.constant(grid, 1.0)
    return solve_linear_steady_state(profile, walls)


@pytest.fixture(scope="session")
def ness_100_400():
    walls = WallTemperatures(100.0, 400.0, 1.0)
    return find_ness(walls)


@pytest.fixture(scope="session")
def ness_sweep():
    """Converged runs at T1 in {1e2, 1e3, 1e4}, T2 = 4 T1, kappa = 1."""
    out = {}
    for t1 in (1e2, 1e3, 1e4):
        walls = WallTemperatures(t1, 4.0 * t1, 1.0)
        out[t1] = find_ness(walls)
    return out


@pytest.fixture(scope="session")
def ness_100_400_fine():
    walls = WallTemperatures(100.0, 400.0, 1.0)
    base = find_ness(walls)
    warm = np.interp(SpatialGrid.graded(128).nodes,
                     base.final.grid.nodes, base.final.tau)
    return base, find_ness(walls, nodes=128, initial_profile=warm)
