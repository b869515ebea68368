"""Physics sanity suite for a converged steady state.

Bundles the structural properties the steady state must carry (zero bulk
velocity, constant pressure, constant heat flux, temperature inside the wall
band, Holder-regular profile, admissibility margins, asymptotic brackets)
into one report with a named check per property.  Failures never raise; they
are entries in the report, which serializes deterministically so runs can be
diffed byte-for-byte.
"""

from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from .fixed_point import check_condition
from .linear_bgk import weak_form_residual

DEFAULT_TOLERANCES = {
    "mass_tol": 1e-8,
    "momentum_tol": 1e-6,
    "pressure_var_tol": 1e-4,
    "flux_var_tol": 1e-3,
    "weak_residual_tol": 1e-4,
    "band_slack": 1e-9,
}


def heat_flux(solution):
    """Heat flux profile: third central velocity moment of the steady state.

    Constant in x exactly at the self-consistent fixed point; for a frozen
    non-fixed profile it relaxes toward the walls at rate 1/kappa.
    """
    return solution.flux.copy()


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def format(self):
        status = "pass" if self.passed else "FAIL"
        tol = "-" if self.tolerance is None else f"{self.tolerance:.3e}"
        line = f"{self.name:<28s} {status:<4s} value={self.value:.10e} tol={tol}"
        if self.detail:
            line += f"  [{self.detail}]"
        return line


@dataclass(frozen=True)
class DiagnosticsReport:
    checks: list
    bracket_reports: list
    walls_summary: str
    tolerances: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and all(
            r.passed for r in self.bracket_reports if r.applicable)

    def to_text(self):
        lines = [f"diagnostics for {self.walls_summary}"]
        lines.extend(c.format() for c in self.checks)
        for r in self.bracket_reports:
            if not r.applicable:
                lines.append(f"bracket {r.name:<22s} skip (hypothesis not met)")
                continue
            status = "pass" if r.passed else "FAIL"
            lo = "-inf" if r.lower is None else f"{r.lower:.10e}"
            hi = "+inf" if r.upper is None else f"{r.upper:.10e}"
            lines.append(f"bracket {r.name:<22s} {status:<4s} "
                         f"value={r.computed:.10e} in [{lo}, {hi}]")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def run_full_diagnostics(solution, tolerances=None, gamma1=1.0, gamma2=1.0,
                         include_weak_form=True, fixed_point_report=None):
    tols = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tols.update(tolerances)
    walls = solution.walls
    scale = walls.geometric_mean
    checks = []

    mass_defect = abs(solution.mass - 1.0)
    checks.append(CheckResult("mass_defect", mass_defect, tols["mass_tol"],
                              mass_defect <= tols["mass_tol"]))

    sqrt_p = np.sqrt(solution.pressure)
    u_rel = float(np.max(np.abs(solution.u))) / sqrt_p
    checks.append(CheckResult("momentum_max_rel", u_rel, tols["momentum_tol"],
                              u_rel <= tols["momentum_tol"],
                              detail="max|u| / sqrt(P)"))

    p_var = float(solution.pressure_profile.max()
                  - solution.pressure_profile.min()) / solution.pressure
    checks.append(CheckResult("pressure_variation", p_var,
                              tols["pressure_var_tol"],
                              p_var <= tols["pressure_var_tol"]))

    flux = solution.flux
    mean_flux = float(flux.mean())
    flux_floor = 1e-6 * solution.pressure * sqrt_p
    if abs(mean_flux) >= flux_floor:
        f_var = float(flux.max() - flux.min()) / abs(mean_flux)
        checks.append(CheckResult("flux_variation", f_var,
                                  tols["flux_var_tol"],
                                  f_var <= tols["flux_var_tol"],
                                  detail=f"mean flux {mean_flux:.6e}"))
    else:
        f_abs = float(np.max(np.abs(flux)))
        checks.append(CheckResult("flux_zero", f_abs, flux_floor,
                                  f_abs <= flux_floor,
                                  detail="equilibrium-like: |J| ~ 0"))

    slack = tols["band_slack"] * scale
    lo_margin = float(solution.tau.min() - walls.t1)
    hi_margin = float(walls.t2 - solution.tau.max())
    checks.append(CheckResult("tau_band_lower_margin", lo_margin, -slack,
                              lo_margin >= -slack))
    checks.append(CheckResult("tau_band_upper_margin", hi_margin, -slack,
                              hi_margin >= -slack))
    tau_mid = float(solution.tau_at(0.5))
    checks.append(CheckResult("tau_mid_deviation", tau_mid / scale - 1.0,
                              None, True, detail="tau(1/2)/sqrt(t1 t2) - 1"))

    # Fitted amplitude of the density flatness bound: |rho - 1| scaled by
    # the predicted (kappa^2 t1)^(-1/4) decay.  Informational, no threshold.
    rho_dev = max(float(solution.rho.max() - 1.0), float(1.0 - solution.rho.min()))
    fitted = rho_dev * (walls.kappa ** 2 * walls.t1) ** 0.25
    checks.append(CheckResult("density_flatness_fitted", fitted, None, True,
                              detail=f"max|rho-1|={rho_dev:.6e}"))

    cond = check_condition(walls, gamma1, gamma2)
    checks.append(CheckResult("condition_margin_1", cond.margin_c1, 0.0,
                              cond.holds_c1, detail="kappa^2 t1 - gamma2"))
    checks.append(CheckResult("condition_margin_2", cond.margin_c2, 0.0,
                              cond.holds_c2,
                              detail="sqrt(t2)-sqrt(t1)-gamma1 kappa^(1/2) t2^(1/4)"))

    hmod = bounds_mod.holder_modulus(solution.grid.nodes, solution.tau)
    checks.append(CheckResult("holder_modulus", hmod, None,
                              np.isfinite(hmod),
                              detail="sup |dtau| / sqrt(|dx|)"))

    if fixed_point_report is not None:
        checks.append(CheckResult("clamp_events",
                                  float(fixed_point_report.clamp_events), 0.0,
                                  fixed_point_report.clamp_events == 0))
        checks.append(CheckResult("iterations",
                                  float(fixed_point_report.iterations), None,
                                  fixed_point_report.converged))

    if include_weak_form:
        resid = weak_form_residual(solution)
        checks.append(CheckResult("weak_form_residual", resid,
                                  tols["weak_residual_tol"],
                                  resid <= tols["weak_residual_tol"]))

    brackets = bounds_mod.evaluate_brackets(solution)
    summary = (f"t1={walls.t1:.17g} t2={walls.t2:.17g} "
               f"kappa={walls.kappa:.17g}")
    return DiagnosticsReport(checks=checks, bracket_reports=brackets,
                             walls_summary=summary, tolerances=tols)
