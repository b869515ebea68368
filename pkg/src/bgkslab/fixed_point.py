"""Damped Picard iteration on the temperature-profile map.

The self-consistency map sends a frozen profile T(x) to the temperature
tau(x) = P/rho(x) - u(x)^2 of the steady linear solve with that profile; a
fixed point of the map is a steady state of the full nonlinear problem.  The
map is only known to be continuous and to preserve the band [t1, t2] under
the admissibility condition on the wall temperatures, so the driver uses
damped Picard from the constant profile sqrt(t1*t2) (the asymptotic value of
the answer), clamping iterates into the band and counting clamp events as an
anomaly signal.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import SpatialGrid, TemperatureProfile
from .kernels import WallTemperatures
from .linear_bgk import SteadySolution, get_workspace, solve_linear_steady_state

DEFAULT_DAMPING = 0.5
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 200
DEFAULT_GAMMA1 = 1.0
DEFAULT_GAMMA2 = 1.0

# Iterates may leave [t1, t2] by at most this fraction of sqrt(t1*t2)
# before the run is declared invalid rather than silently clamped.
ESCAPE_TOL = 1e-9


class ConditionError(RuntimeError):
    """The wall temperatures fail the admissibility condition."""


class ConvergenceError(RuntimeError):
    """Picard iteration did not reach tolerance; carries the delta history."""

    def __init__(self, message, deltas):
        super().__init__(message)
        self.deltas = list(deltas)


class InvariantViolationError(RuntimeError):
    """An iterate escaped the invariant band by more than the allowed slack."""


@dataclass(frozen=True)
class ConditionReport:
    """Admissibility verdicts and margins for a pair of wall temperatures.

    Margin 1 is kappa^2*t1 - gamma2; margin 2 is
    (sqrt(t2) - sqrt(t1)) - gamma1 * sqrt(kappa) * t2^(1/4).  Both conditions
    are strict inequalities.
    """

    holds_c1: bool
    holds_c2: bool
    margin_c1: float
    margin_c2: float
    gamma1: float
    gamma2: float

    @property
    def holds(self):
        return self.holds_c1 and self.holds_c2


def check_condition(walls, gamma1=DEFAULT_GAMMA1, gamma2=DEFAULT_GAMMA2):
    if gamma1 <= 0.0 or gamma2 <= 0.0:
        raise ValueError("gamma1, gamma2 must be positive")
    m1 = walls.kappa ** 2 * walls.t1 - gamma2
    m2 = (np.sqrt(walls.t2) - np.sqrt(walls.t1)
          - gamma1 * np.sqrt(walls.kappa) * walls.t2 ** 0.25)
    return ConditionReport(holds_c1=m1 > 0.0, holds_c2=m2 >= 0.0,
                           margin_c1=float(m1), margin_c2=float(m2),
                           gamma1=gamma1, gamma2=gamma2)


def apply_F(profile, walls, workspace=None):
    """One application of the temperature map; returns the output profile.

    The underlying steady solution is attached for callers that need the
    full observables (see linear_bgk.solve_linear_steady_state for those).
    """
    solution = solve_linear_steady_state(profile, walls, workspace)
    return TemperatureProfile(grid=profile.grid, values=solution.tau)


@dataclass(frozen=True)
class FixedPointReport:
    iterates: list
    sup_norm_deltas: list
    converged: bool
    final: SteadySolution
    damping: float
    clamp_events: int
    suspect: bool = False
    condition: ConditionReport = field(default=None, repr=False)

    @property
    def iterations(self):
        return len(self.sup_norm_deltas)


def _non_decreasing_tail(deltas, length=5):
    """Whether the delta sequence ends with > `length` non-decreasing steps."""
    run = 0
    for a, b in zip(deltas[:-1], deltas[1:]):
        run = run + 1 if b >= a else 0
    return run > length


def find_ness(walls, nodes=None, grading=None, damping=DEFAULT_DAMPING,
              tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS,
              gamma1=DEFAULT_GAMMA1, gamma2=DEFAULT_GAMMA2, force=False,
              initial_profile=None, grid=None):
    """Drive the temperature map to its fixed point.

    Stops when the damped update moves the profile by no more than
    tol * sqrt(t1*t2) in sup norm.  Raises ConditionError when the wall
    temperatures are inadmissible (unless force=True), ConvergenceError
    after max_iters, and InvariantViolationError if an iterate leaves
    [t1, t2] by more than ESCAPE_TOL * sqrt(t1*t2).
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    condition = check_condition(walls, gamma1, gamma2)
    if not condition.holds and not force:
        raise ConditionError(
            f"wall temperatures inadmissible: margins "
            f"c1={condition.margin_c1:.6g}, c2={condition.margin_c2:.6g} "
            f"(pass force=True to iterate anyway)")
    if grid is None:
        from .grid import DEFAULT_GRADING, DEFAULT_NODES
        grid = SpatialGrid.graded(nodes or DEFAULT_NODES,
                                  grading or DEFAULT_GRADING)
    workspace = get_workspace(grid)
    scale = walls.geometric_mean
    if initial_profile is None:
        profile = TemperatureProfile.constant(grid, scale)
    else:
        profile = TemperatureProfile(grid=grid,
                                     values=np.asarray(initial_profile, float))
    iterates = [profile]
    deltas = []
    clamp_events = 0
    solution = None
    converged = False
    escape_slack = ESCAPE_TOL * scale
    for _ in range(max_iters):
        solution = solve_linear_steady_state(profile, walls, workspace)
        updated = (1.0 - damping) * profile.values + damping * solution.tau
        overshoot = max(float(np.max(walls.t1 - updated, initial=0.0)),
                        float(np.max(updated - walls.t2, initial=0.0)))
        if overshoot > escape_slack:
            raise InvariantViolationError(
                f"iterate escaped [{walls.t1}, {walls.t2}] by {overshoot:.3e} "
                f"(allowed {escape_slack:.3e})")
        next_profile, n_clamped = TemperatureProfile(
            grid=grid, values=updated).clipped(walls.t1, walls.t2)
        clamp_events += n_clamped
        delta = float(np.max(np.abs(next_profile.values - profile.values)))
        deltas.append(delta)
        iterates.append(next_profile)
        profile = next_profile
        if delta <= tol * scale:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"no fixed point after {max_iters} iterations "
            f"(last delta {deltas[-1]:.3e}, target {tol * scale:.3e})", deltas)
    # Re-solve at the final clamped profile so the reported solution is
    # consistent with the fixed point actually returned.
    solution = solve_linear_steady_state(profile, walls, workspace)
    suspect = _non_decreasing_tail(deltas)
    return FixedPointReport(iterates=iterates, sup_norm_deltas=deltas,
                            converged=converged, final=solution,
                            damping=damping, clamp_events=clamp_events,
                            suspect=suspect, condition=condition)
