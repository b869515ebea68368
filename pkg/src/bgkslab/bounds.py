"""Closed-form asymptotic brackets for the wall moments, pressure and profile.

Each function evaluates a displayed bracket from the large-temperature
analysis of the two-wall problem and, where a computed quantity is supplied,
checks that it falls inside.  Two constants are repaired relative to their
printed source: the lower bound on the wall deficit D_i = 1 - C_i and the
upper bracket function F2.  The printed D_i lower bound exceeds the printed
upper bound as T_i grows (the half-Gaussian mass sqrt(pi/2) appears as
2*sqrt(pi) at one step), and the printed F2 is below one, which the exact
equilibrium identity (the bracketed ratio equals one when t1 = t2) rules
out.  The versions implemented here follow the same derivation chain with
the correct constants; the deficit correction term E_i displayed alongside
is consistent with the repaired forms and is used verbatim.
"""

import math
from dataclasses import dataclass, field

import numpy as np

SQRT_PI_HALF = math.sqrt(math.pi / 2.0)

# Validity threshold for the deficit lower bound: kappa^2 * T > 1/(2*pi).
DEFICIT_HYPOTHESIS = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True)
class BoundReport:
    """One bracket check: quantity, bracket, and pass/fail with margins."""

    name: str
    computed: float
    lower: float
    upper: float
    applicable: bool
    params: dict = field(default_factory=dict)

    @property
    def passed(self):
        if not self.applicable:
            return True
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return lo <= self.computed <= hi

    @property
    def margins(self):
        """(lower, upper) margins as fractions of the computed value."""
        scale = abs(self.computed) if self.computed else 1.0
        lo = np.nan if self.lower is None else (self.computed - self.lower) / scale
        hi = np.nan if self.upper is None else (self.upper - self.computed) / scale
        return lo, hi


def deficit_correction(temperature, kappa):
    """E_i = -1/(kappa sqrt(2 pi T)) + (8/(pi kappa^2 T))^(1/4).

    The relative correction by which the wall deficit lower bound falls
    short of its upper bound; decays like (kappa^2 T)^(-1/4).
    """
    return (-1.0 / (kappa * math.sqrt(2.0 * math.pi * temperature))
            + (8.0 / (math.pi * kappa ** 2 * temperature)) ** 0.25)


def bound_D(walls, wall_index):
    """Bracket for the wall deficit D_i = 1 - C_i.

    Upper: (1/kappa) sqrt(pi/(2 T_i)), always valid.  Lower:
    sqrt(pi/2)/(kappa sqrt(T_i)) + 1/(2 kappa^2 T_i)
    - (2 pi / (kappa^6 T_i^3))^(1/4), valid for kappa^2 T_i > 1/(2 pi);
    returns (None, upper) outside that hypothesis.
    """
    if wall_index not in (1, 2):
        raise ValueError("wall_index must be 1 or 2")
    t = walls.t1 if wall_index == 1 else walls.t2
    kap = walls.kappa
    upper = math.sqrt(math.pi / (2.0 * t)) / kap
    if kap ** 2 * t <= DEFICIT_HYPOTHESIS:
        return None, upper
    lower = (SQRT_PI_HALF / (kap * math.sqrt(t))
             + 1.0 / (2.0 * kap ** 2 * t)
             - (2.0 * math.pi / (kap ** 6 * t ** 3)) ** 0.25)
    return lower, upper


def bound_C_pm(walls):
    """Bracket for twice the interior wall loads, 2*C_minus and 2*C_plus:

        (1/kappa) (1 - 2 (2/(pi kappa^2 t1))^(1/4))  <=  2C  <=  1/kappa.

    Valid whenever the profile stays above t1.
    """
    kap = walls.kappa
    lower = (1.0 - 2.0 * (2.0 / (math.pi * kap ** 2 * walls.t1)) ** 0.25) / kap
    return lower, 1.0 / kap


def _k1_correction(walls):
    """Relative defect of 1 - C1*C2 below its leading asymptotic value."""
    s1, s2 = math.sqrt(walls.t1), math.sqrt(walls.t2)
    e1 = deficit_correction(walls.t1, walls.kappa)
    e2 = deficit_correction(walls.t2, walls.kappa)
    return (s2 * e1 + s1 * e2 + SQRT_PI_HALF / walls.kappa) / (s1 + s2)


def bound_F(walls):
    """Bracket functions (F1, F2) for the normalized left-wall flux ratio

        (C_minus + C2 C_plus) / (1 - C1 C2)
            over  sqrt(2/pi) sqrt(t1 t2) / (sqrt(t1) + sqrt(t2)).

    F1 is the printed lower function; F2 is the chain-derived upper function
    (1 - L2/2)/(1 - K1) with L2 the deficit lower bound of wall 2 and K1 the
    closure correction.  F2 is None when K1 >= 1 (bracket inapplicable).
    Both tend to one as the temperatures grow.
    """
    t1, t2, kap = walls.t1, walls.t2, walls.kappa
    f1 = (1.0 + (math.pi / (2.0 * kap ** 6 * t1 ** 3)) ** 0.25
          - 2.0 * (2.0 / (math.pi * kap ** 2 * t1)) ** 0.25
          - 0.5 * math.sqrt(math.pi / (2.0 * kap ** 2 * t1)))
    k1 = _k1_correction(walls)
    if k1 >= 1.0:
        return f1, None
    l2 = SQRT_PI_HALF * (1.0 - deficit_correction(t2, kap)) / (kap * math.sqrt(t2))
    f2 = (1.0 - 0.5 * l2) / (1.0 - k1)
    return f1, f2


def bound_G(walls):
    """Pressure bracket functions (G1, G2): G1 sqrt(t1 t2) <= P <= G2 sqrt(t1 t2).

        G1 = F1 (1 - sqrt(2/pi) / (kappa (sqrt(t1) + sqrt(t2)))),
        G2 = F2 + sqrt(1 / (2 pi kappa^2 t1)).
    """
    f1, f2 = bound_F(walls)
    g1 = f1 * (1.0 - math.sqrt(2.0 / math.pi)
               / (walls.kappa * (math.sqrt(walls.t1) + math.sqrt(walls.t2))))
    g2 = None if f2 is None else f2 + math.sqrt(
        1.0 / (2.0 * math.pi * walls.kappa ** 2 * walls.t1))
    return g1, g2


def flux_ratio_scale(walls):
    """sqrt(2/pi) sqrt(t1 t2) / (sqrt(t1) + sqrt(t2)), the common normalizer."""
    return (math.sqrt(2.0 / math.pi) * walls.geometric_mean
            / (math.sqrt(walls.t1) + math.sqrt(walls.t2)))


def closure_asymptotic_ratio(c1, c2, walls):
    """[1/(1 - C1 C2)] / [sqrt(2/pi) kappa sqrt(t1 t2)/(sqrt(t1)+sqrt(t2))].

    Tends to one from above as the temperatures grow; the sweep tests assert
    the monotone shrink of its deviation.
    """
    return (1.0 / (1.0 - c1 * c2)) / (walls.kappa * flux_ratio_scale(walls))


def holder_modulus(x, values):
    """Smallest C with |v(x1) - v(x2)| <= C sqrt(|x1 - x2|) over node pairs."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(x) < 32:
        raise ValueError("holder_modulus needs at least 32 nodes")
    dx = np.abs(x[:, None] - x[None, :])
    dv = np.abs(values[:, None] - values[None, :])
    mask = dx > 0.0
    return float(np.max(dv[mask] / np.sqrt(dx[mask])))


def evaluate_brackets(solution):
    """All bracket checks against one steady solution, as BoundReports."""
    walls = solution.walls
    m = solution.moments
    params = {"t1": walls.t1, "t2": walls.t2, "kappa": walls.kappa}
    reports = []
    for idx, c in ((1, m.c1), (2, m.c2)):
        lo, hi = bound_D(walls, idx)
        reports.append(BoundReport(
            name=f"wall_deficit_{idx}", computed=1.0 - c,
            lower=lo, upper=hi, applicable=True, params=params))
    lo, hi = bound_C_pm(walls)
    for name, c in (("interior_load_minus", m.c_minus),
                    ("interior_load_plus", m.c_plus)):
        reports.append(BoundReport(
            name=name, computed=2.0 * c, lower=lo, upper=hi,
            applicable=True, params=params))
    f1, f2 = bound_F(walls)
    ratio = m.left_flux / flux_ratio_scale(walls)
    reports.append(BoundReport(
        name="left_flux_ratio", computed=ratio, lower=f1, upper=f2,
        applicable=f2 is not None, params=params))
    g1, g2 = bound_G(walls)
    reports.append(BoundReport(
        name="pressure_normalized",
        computed=solution.pressure / walls.geometric_mean,
        lower=g1, upper=g2, applicable=g2 is not None, params=params))
    return reports
