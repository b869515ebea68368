import math

import numpy as np
import pytest
from scipy.integrate import quad

from bgkslab.kernels import (ABS_TOL, REL_TOL, KernelSingularityError,
                             WallTemperatures, boundary_constants,
                             kernel_moment, kernel_moment_multi, maxwellian,
                             sample_wall_velocity, wall_maxwellian,
                             wall_moment, wall_speed_from_uniform)

SQ2PI = math.sqrt(2.0 * math.pi)


def quad_half_moment(order, distance, temperature, kappa):
    """Adaptive Gauss-Kronrod oracle with the u = 1/v substitution on (0, 1]
    and the native variable on [1, inf)."""
    def outer(v):
        return v ** order * np.exp(-distance / (kappa * v)) \
            * np.exp(-0.5 * v * v / temperature) / np.sqrt(2 * np.pi * temperature)

    def inner(u):  # v = 1/u
        return outer(1.0 / u) / u ** 2

    lo, err_lo = quad(inner, 1.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    hi, err_hi = quad(outer, 1.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return lo + hi


def test_maxwellian_peak_and_symmetry():
    assert maxwellian(1.0, 0.0) == pytest.approx(1.0 / SQ2PI, abs=1e-15)
    assert maxwellian(4.0, 2.0) == maxwellian(4.0, -2.0)


def test_maxwellian_normalization_quadrature():
    total = quad(lambda v: maxwellian(2.0, v), -np.inf, np.inf,
                 epsabs=1e-14)[0]
    assert abs(total - 1.0) < 1e-12


def test_maxwellian_rejects_bad_temperature():
    with pytest.raises(ValueError):
        maxwellian(0.0, 1.0)
    with pytest.raises(ValueError):
        maxwellian(-1.0, 1.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 10.0])
def test_wall_maxwellian_unit_flux(t):
    flux = quad(lambda v: v * wall_maxwellian(t, v), 0.0, np.inf,
                epsabs=1e-13)[0]
    assert abs(flux - 1.0) < 1e-12


def test_wall_maxwellian_flux_normalization_wide_range():
    # log-grid sweep of the unit-outgoing-flux normalization
    for t in np.logspace(-2, 6, 17):
        flux = quad(lambda u: u * np.exp(-0.5 * u * u),
                    0.0, np.inf)[0]  # after v = u sqrt(t): t cancels exactly
        assert abs(flux - 1.0) < 1e-10
        v = np.sqrt(t) * np.array([0.1, 1.0, 2.5])
        expected = np.exp(-0.5 * v * v / t) / t
        assert np.allclose(wall_maxwellian(t, v), expected, rtol=1e-14)


@pytest.mark.parametrize("t", [0.5, 1.0, 10.0])
def test_wall_maxwellian_second_moment(t):
    moment = quad(lambda v: v * v * wall_maxwellian(t, v), 0.0, np.inf,
                  epsabs=1e-13)[0]
    assert moment == pytest.approx(math.sqrt(math.pi * t / 2.0), rel=1e-12)


def test_wall_maxwellian_peak():
    assert wall_maxwellian(1.0, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_kernel_moment_closed_values():
    assert kernel_moment(0, 0.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-13)
    assert kernel_moment(1, 0.0, 1.0, 1.0) == pytest.approx(1.0 / SQ2PI,
                                                            abs=1e-13)
    # strict decay in the flight distance
    assert kernel_moment(1, 1.0, 1.0, 1.0) < kernel_moment(1, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("order", [-1, 0, 1, 2, 3, 4])
def test_kernel_moment_against_adaptive_quadrature(order):
    rng = np.random.default_rng(42 + order)
    for _ in range(12):
        a = 10.0 ** rng.uniform(-8, 0.5)
        t = 10.0 ** rng.uniform(-1, 4)
        kappa = 10.0 ** rng.uniform(-0.5, 0.5)
        got = kernel_moment(order, a, t, kappa)
        ref = quad_half_moment(order, a, t, kappa)
        assert abs(got - ref) <= ABS_TOL + REL_TOL * abs(ref), \
            (order, a, t, kappa, got, ref)


def test_kernel_moment_log_singular_member_brute_force():
    """n = -1 against the w = a/(kappa v) substitution form, 20 points.

    After the substitution the member becomes
    int_0^inf e^(-w) M_T(a/(kappa w)) dw / w, which adaptive quadrature
    handles at any a; mpmath pins it at high precision.
    """
    import mpmath as mp
    mp.mp.dps = 35
    rng = np.random.default_rng(7)
    points = [(10.0 ** rng.uniform(-10, 0), 10.0 ** rng.uniform(-1, 3))
              for _ in range(20)]
    for a, t in points:
        got = kernel_moment(-1, a, t, 1.0)
        ref = float(mp.quad(
            lambda w: mp.e ** (-w) / w * mp.e ** (-(a / w) ** 2 / (2 * t))
            / mp.sqrt(2 * mp.pi * t),
            [0, a, max(a, 1.0), mp.inf]))
        assert abs(got - ref) / abs(ref) <= 1e-8, (a, t, got, ref)


def test_kernel_moment_scaling_law():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = rng.integers(-1, 3)
        a = 10.0 ** rng.uniform(-6, 0)
        t = 10.0 ** rng.uniform(-2, 5)
        kappa = 10.0 ** rng.uniform(-1, 1)
        lhs = kernel_moment(int(n), a, t, kappa)
        rhs = t ** (n / 2.0) * kernel_moment(int(n), a / math.sqrt(t), 1.0,
                                             kappa)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_kernel_moment_monotonicity():
    a_grid = np.array([1e-4, 1e-3, 1e-2, 0.1, 0.3, 1.0])
    for order in (0, 1, 2):
        vals = kernel_moment(order, a_grid, 1.0, 1.0)
        assert np.all(np.diff(vals) < 0.0)
        # increasing in temperature at fixed positive distance
        t_grid = np.array([0.5, 1.0, 2.0, 5.0, 20.0])
        vals_t = kernel_moment(order, 0.2, t_grid, 1.0)
        assert np.all(np.diff(vals_t) > 0.0)


def test_kernel_moment_multi_matches_single():
    rng = np.random.default_rng(5)
    a = 10.0 ** rng.uniform(-6, 0, 50)
    t = 10.0 ** rng.uniform(-1, 3, 50)
    multi = kernel_moment_multi((-1, 0, 2), a, t, 2.0)
    for order in (-1, 0, 2):
        single = kernel_moment(order, a, t, 2.0)
        assert np.array_equal(multi[order], single)


def test_kernel_moment_domain_errors():
    with pytest.raises(KernelSingularityError):
        kernel_moment(-1, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        kernel_moment(0, -0.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        kernel_moment(0, 0.1, -1.0, 1.0)
    with pytest.raises(ValueError):
        kernel_moment(0, 0.1, 1.0, 0.0)
    with pytest.raises(ValueError):
        kernel_moment(5, 0.1, 1.0, 1.0)


def test_wall_temperatures_validation():
    with pytest.raises(ValueError):
        WallTemperatures(2.0, 1.0, 1.0)  # no silent swap
    with pytest.raises(ValueError):
        WallTemperatures(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        WallTemperatures(1.0, 2.0, 0.0)


def test_boundary_constants_in_unit_interval():
    for t1, t2, kappa in ((0.5, 0.7, 1.0), (1.0, 1.0, 1.0),
                          (100.0, 400.0, 1.0), (10.0, 1e4, 0.3)):
        c1, c2 = boundary_constants(WallTemperatures(t1, t2, kappa))
        assert 0.0 < c1 < 1.0 and 0.0 < c2 < 1.0


def test_boundary_constants_equal_walls():
    c1, c2 = boundary_constants(WallTemperatures(3.0, 3.0, 1.0))
    assert c1 == c2


def test_boundary_constants_against_quadrature():
    walls = WallTemperatures(100.0, 400.0, 1.0)
    c1, c2 = boundary_constants(walls)
    ref1 = quad(lambda v: v * np.exp(-1.0 / v) * wall_maxwellian(100.0, v),
                0.0, np.inf, epsabs=1e-13)[0]
    assert c1 == pytest.approx(ref1, abs=1e-11)


def test_deficit_bracket_at_hot_parameters():
    # corrected large-T bracket for 1 - C1 (see bounds module docstring)
    t1, kappa = 100.0, 1.0
    c1, _ = boundary_constants(WallTemperatures(t1, t1, kappa))
    d1 = 1.0 - c1
    upper = math.sqrt(math.pi / (2.0 * t1)) / kappa
    lower = (math.sqrt(math.pi / 2.0) / (kappa * math.sqrt(t1))
             + 1.0 / (2.0 * kappa ** 2 * t1)
             - (2.0 * math.pi / (kappa ** 6 * t1 ** 3)) ** 0.25)
    assert lower <= d1 <= upper


def test_wall_moment_consistency():
    # wall distribution is sqrt(2 pi / T) times the Maxwellian
    val = wall_moment(1, 0.5, 9.0, 1.0)
    ref = SQ2PI / 3.0 * kernel_moment(1, 0.5, 9.0, 1.0)
    assert val == pytest.approx(ref, rel=1e-15)


def test_wall_speed_inverse_cdf_identity():
    for t in (0.5, 1.0, 25.0):
        assert wall_speed_from_uniform(t, math.exp(-0.5)) == \
            pytest.approx(math.sqrt(t), rel=1e-14)


def test_sample_wall_velocity_mean():
    rng = np.random.default_rng(123)
    t = 4.0
    n = 10 ** 6
    samples = wall_speed_from_uniform(t, 1.0 - rng.random(n))
    mean = samples.mean()
    expected = math.sqrt(math.pi * t / 2.0)
    stderr = samples.std(ddof=1) / math.sqrt(n)
    assert abs(mean - expected) < 4.0 * stderr


def test_sample_wall_velocity_ks():
    from scipy.stats import kstest
    rng = np.random.default_rng(99)
    t = 2.0
    n = 10 ** 5
    samples = np.array([sample_wall_velocity(t, rng) for _ in range(2000)])
    samples = np.concatenate([samples,
                              wall_speed_from_uniform(t, 1.0 - rng.random(n - 2000))])
    stat = kstest(samples, lambda s: 1.0 - np.exp(-s * s / (2.0 * t))).statistic
    assert stat < 1.628 / math.sqrt(n)  # 1% critical value


def test_sample_wall_velocity_positive():
    rng = np.random.default_rng(0)
    draws = [sample_wall_velocity(1.0, rng) for _ in range(100)]
    assert all(v > 0.0 for v in draws)
