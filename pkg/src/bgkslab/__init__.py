"""Steady states of a relaxation-model gas slab between two thermal walls.

Deterministic solve (closed-form transport representation, Nystrom-
discretized), self-consistency fixed point for the nonlinear problem, a
piecewise-deterministic jump-process simulator to cross-check it, and the
asymptotic bracket checks that tie both to the large-temperature analysis.
"""

__version__ = "0.1.0"

from .kernels import (WallTemperatures, boundary_constants, kernel_moment,
                      maxwellian, sample_wall_velocity, wall_maxwellian)
from .grid import SpatialGrid, TemperatureProfile
from .linear_bgk import (MomentConstants, SteadySolution,
                         assemble_density_operator, compute_observables,
                         reconstruct_f, solve_linear_steady_state,
                         solve_steady_density, weak_form_residual)
from .fixed_point import (ConditionReport, FixedPointReport, apply_F,
                          check_condition, find_ness)
from .stochastic import (EmpiricalMoments, ParticleState, doeblin_beta,
                         hitting_time, minorization_check, simulate, step)
from .bounds import (BoundReport, bound_C_pm, bound_D, bound_F, bound_G,
                     evaluate_brackets, holder_modulus)
from .diagnostics import DiagnosticsReport, heat_flux, run_full_diagnostics

__all__ = [
    "WallTemperatures", "boundary_constants", "kernel_moment", "maxwellian",
    "sample_wall_velocity", "wall_maxwellian", "SpatialGrid",
    "TemperatureProfile", "MomentConstants", "SteadySolution",
    "assemble_density_operator", "compute_observables", "reconstruct_f",
    "solve_linear_steady_state", "solve_steady_density",
    "weak_form_residual", "ConditionReport", "FixedPointReport", "apply_F",
    "check_condition", "find_ness", "EmpiricalMoments", "ParticleState",
    "doeblin_beta", "hitting_time", "minorization_check", "simulate", "step",
    "BoundReport", "bound_C_pm", "bound_D", "bound_F", "bound_G",
    "evaluate_brackets", "holder_modulus", "DiagnosticsReport", "heat_flux",
    "run_full_diagnostics",
]
