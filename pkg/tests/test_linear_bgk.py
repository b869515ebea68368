import numpy as np
import pytest
from scipy.integrate import quad

from bgkslab import (SpatialGrid, TemperatureProfile, WallTemperatures,
                     reconstruct_f, wall_maxwellian, weak_form_residual)
from bgkslab.linear_bgk import (GrazingError, SolverError, apply_operator_at,
                                assemble_density_operator,
                                solve_linear_steady_state,
                                solve_steady_density)


def _constant_setup(t, n=64, kappa=1.0):
    walls = WallTemperatures(t, t, kappa)
    grid = SpatialGrid.graded(n)
    profile = TemperatureProfile.constant(grid, t)
    return walls, grid, profile


def test_equilibrium_operator_fixes_uniform_density():
    walls, grid, profile = _constant_setup(1.0)
    op = assemble_density_operator(profile, walls)
    image = op.matrix @ np.ones(grid.n)
    assert np.max(np.abs(image - 1.0)) < 1e-9


def test_operator_entries_nonnegative():
    walls = WallTemperatures(100.0, 400.0, 1.0)
    grid = SpatialGrid.graded(64)
    profile = TemperatureProfile.constant(grid, walls.geometric_mean)
    op = assemble_density_operator(profile, walls)
    assert op.matrix.min() >= 0.0


def test_operator_action_refinement_order():
    """Doubling the grid refines the operator action at order ~2 on a smooth
    density (Richardson oracle at fixed probe points)."""
    walls = WallTemperatures(100.0, 400.0, 1.0)
    probes = np.array([0.37, 0.61])
    vals = {}
    for n in (16, 32, 64):
        grid = SpatialGrid.graded(n)
        profile = TemperatureProfile(
            grid=grid,
            values=walls.geometric_mean * (1.0 + 0.2 * np.sin(np.pi * grid.nodes)))
        op = assemble_density_operator(profile, walls)
        rho = 1.0 + 0.3 * np.sin(np.pi * grid.nodes)
        vals[n] = apply_operator_at(op, rho, probes)
    d1 = np.abs(vals[16] - vals[32]).max()
    d2 = np.abs(vals[32] - vals[64]).max()
    order = np.log2(d1 / d2)
    assert order >= 1.5


def test_equilibrium_density_uniform(equilibrium_solution):
    sol = equilibrium_solution
    assert np.max(np.abs(sol.rho - 1.0)) < 1e-6
    assert abs(sol.mass - 1.0) < 1e-12


def test_solve_residual_definition(equilibrium_solution):
    assert equilibrium_solution.info.residual < 1e-10


def test_solve_reports_gap(equilibrium_solution):
    assert equilibrium_solution.info.spectral_gap > 1e-3
    assert abs(equilibrium_solution.info.eigenvalue - 1.0) < 1e-8


def test_density_flatness_rate_across_temperatures():
    """max|rho - 1| decays like T1^(-1/4) between two parameter points."""
    devs = {}
    for t1 in (50.0, 200.0):
        walls = WallTemperatures(t1, 4.0 * t1, 1.0)
        grid = SpatialGrid.graded(64)
        profile = TemperatureProfile.constant(grid, walls.geometric_mean)
        sol = solve_linear_steady_state(profile, walls)
        devs[t1] = max(sol.rho.max() - 1.0, 1.0 - sol.rho.min())
    ratio = devs[200.0] / devs[50.0]
    assert 0.4 <= ratio <= 1.0  # predicted (1/4)^(1/4) ~ 0.707


def test_equilibrium_observables(equilibrium_solution):
    sol = equilibrium_solution
    assert abs(sol.pressure - 1.0) < 1e-6
    assert np.max(np.abs(sol.tau - 1.0)) < 1e-6
    assert np.max(np.abs(sol.u)) < 1e-6
    assert np.max(np.abs(sol.flux)) < 1e-6


def test_momentum_vanishing_at_admissible_point(ness_100_400):
    sol = ness_100_400.final
    assert np.max(np.abs(sol.u)) < 1e-6 * np.sqrt(sol.pressure)


def test_pressure_constancy(ness_100_400):
    sol = ness_100_400.final
    spread = sol.pressure_profile.max() - sol.pressure_profile.min()
    assert spread <= 1e-4 * sol.pressure


def test_pressure_in_asymptotic_bracket(ness_100_400):
    from bgkslab.bounds import bound_G
    sol = ness_100_400.final
    g1, g2 = bound_G(sol.walls)
    scale = sol.walls.geometric_mean
    assert g1 * scale <= sol.pressure <= g2 * scale


def test_negative_temperature_detection():
    # corrupting the density forces tau = P/rho - u^2 negative somewhere
    walls, grid, profile = _constant_setup(1.0, n=16)
    op = assemble_density_operator(profile, walls)
    rho, info = solve_steady_density(op)
    bad = rho.copy()
    bad[3] = 2000.0
    from bgkslab.linear_bgk import compute_observables
    with pytest.raises(SolverError):
        compute_observables(bad, op, info)


# ----------------------------------------------------------------------
# reconstruction

def test_reconstruct_density_consistency_equilibrium(equilibrium_solution):
    sol = equilibrium_solution
    rng = np.random.default_rng(17)
    for x in rng.uniform(0.05, 0.95, 5):
        m0 = quad(lambda v: reconstruct_f(sol, x, v), 1e-9, 40.0,
                  limit=300)[0]
        m0 += quad(lambda v: reconstruct_f(sol, x, v), -40.0, -1e-9,
                   limit=300)[0]
        assert abs(m0 - sol.rho_at(x)) < 1e-6


def test_reconstruct_density_consistency_ness(ness_100_400):
    # off-node agreement is limited by the nodal interpolation scale
    sol = ness_100_400.final
    rng = np.random.default_rng(23)
    for x in rng.uniform(0.05, 0.95, 3):
        m0 = quad(lambda v: reconstruct_f(sol, x, v), 1e-8, 300.0,
                  limit=400)[0]
        m0 += quad(lambda v: reconstruct_f(sol, x, v), -300.0, -1e-8,
                   limit=400)[0]
        assert abs(m0 - sol.rho_at(x)) < 5e-6


def test_reconstruct_momentum_vanishes(ness_100_400):
    sol = ness_100_400.final
    rng = np.random.default_rng(29)
    for x in rng.uniform(0.05, 0.95, 3):
        m1 = quad(lambda v: v * reconstruct_f(sol, x, v), 1e-8, 300.0,
                  limit=400)[0]
        m1 += quad(lambda v: v * reconstruct_f(sol, x, v), -300.0, -1e-8,
                   limit=400)[0]
        assert abs(m1) < 1e-6 * np.sqrt(sol.pressure)


def test_reconstruct_boundary_structure(ness_100_400):
    """Near the cold wall the outgoing density is proportional to the wall
    law, with the closure flux as the constant of proportionality."""
    sol = ness_100_400.final
    t1 = sol.walls.t1
    v = np.linspace(0.1 * np.sqrt(t1), 3.0 * np.sqrt(t1), 9)
    ratio = reconstruct_f(sol, 1e-9, v) / wall_maxwellian(t1, v)
    assert (ratio.max() - ratio.min()) / ratio.mean() < 1e-6
    assert ratio.mean() == pytest.approx(sol.moments.left_flux, rel=1e-8)


def test_wall_fluxes_balance(ness_100_400):
    """Net mass flux through each wall vanishes (stationarity)."""
    sol = ness_100_400.final
    for x, flux_const in ((1e-11, sol.moments.left_flux),
                          (1.0 - 1e-11, sol.moments.right_flux)):
        influx = quad(lambda v: abs(v) * reconstruct_f(sol, x, v),
                      -300.0, -1e-8, limit=400)[0]
        outflux = quad(lambda v: v * reconstruct_f(sol, x, v),
                       1e-8, 300.0, limit=400)[0]
        net = outflux - influx
        assert abs(net) < 1e-6 * (outflux + influx)
        # closure identity, re-derived from the reconstruction
        assert abs(influx - flux_const) < 1e-6 * flux_const


def test_closure_identity_exact(ness_100_400):
    m = ness_100_400.final.moments
    lhs = m.left_flux * m.denominator
    assert lhs == pytest.approx(m.c_minus + m.c2 * m.c_plus, rel=1e-12)
    rhs = m.right_flux * m.denominator
    assert rhs == pytest.approx(m.c_plus + m.c1 * m.c_minus, rel=1e-12)


def test_reconstruct_rejects_grazing(equilibrium_solution):
    with pytest.raises(GrazingError):
        reconstruct_f(equilibrium_solution, 0.5, 0.0)
    with pytest.raises(ValueError):
        reconstruct_f(equilibrium_solution, 1.5, 1.0)


# ----------------------------------------------------------------------
# weak form

def test_weak_form_equilibrium(equilibrium_solution):
    assert weak_form_residual(equilibrium_solution) < 1e-8


def test_weak_form_default_tolerance():
    walls = WallTemperatures(50.0, 200.0, 1.0)
    from bgkslab import find_ness
    sol = find_ness(walls).final
    assert weak_form_residual(sol) < 1e-4


def test_weak_form_decreases_under_refinement():
    walls = WallTemperatures(100.0, 400.0, 1.0)
    residuals = []
    for n in (16, 32, 64):
        grid = SpatialGrid.graded(n)
        profile = TemperatureProfile.constant(grid, walls.geometric_mean)
        sol = solve_linear_steady_state(profile, walls)
        residuals.append(weak_form_residual(sol))
    assert residuals[0] > residuals[1] > residuals[2]
    order = np.log2(residuals[0] / residuals[1])
    assert order >= 1.5
