import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gammaln

from dickman import green_bar, green_direct, green_extend, green_G, green_spacetime, heat_kernel
from dickman.errors import DomainError
from dickman.green import GreenEvaluator, green_table
from dickman.special import EULER_GAMMA


def _trapezoid_in_s(log_integrand, s_max=60.0, panels=10**6):
    s = np.linspace(0.0, s_max, panels + 1)
    f = np.exp(log_integrand(s))
    return float(np.sum(f) - 0.5 * (f[0] + f[-1])) * (s_max / panels)


def test_G_at_one_against_trapezoid():
    # integrand e^(-gamma s) s / Gamma(s + 1); zero at s = 0
    with np.errstate(divide="ignore"):
        oracle = _trapezoid_in_s(lambda s: -EULER_GAMMA * s + np.log(s) - gammaln(s + 1.0))
    assert green_G(0.0, 1.0) == pytest.approx(oracle, rel=1e-8)


def test_G_bar_at_gamma_against_trapezoid():
    oracle = _trapezoid_in_s(lambda s: -gammaln(s + 1.0))
    assert green_bar(EULER_GAMMA, 1.0) == pytest.approx(oracle, rel=1e-8)


@given(st.floats(min_value=1e-6, max_value=1.0))
def test_G_increasing_in_theta(t):
    assert green_G(1.0, t) > green_G(0.0, t) > green_G(-1.0, t) > 0.0


def test_G_small_time_leading_order():
    t = 1e-6
    L = math.log(1.0 / t)
    assert abs(t * L * L * green_G(0.0, t) - 1.0) < 0.1


@pytest.mark.parametrize("theta", [-1.0, 0.0, 1.0])
def test_G_small_time_remainder_band(theta):
    for k in range(4, 9):
        t = 10.0**-k
        L = math.log(1.0 / t)
        remainder = t * L * L * green_G(theta, t) - 1.0 - 2.0 * theta / L
        assert -10.0 <= remainder * L * L <= 10.0


def test_G_vectorized_agrees_with_adaptive():
    ts = np.array([1e-5, 0.01, 0.3, 0.77, 1.0])
    table = green_table(0.5, ts)
    for t, value in zip(ts, table):
        assert value == pytest.approx(green_G(0.5, float(t)), rel=1e-9)


def test_G_bar_derivative():
    d = 1e-5
    for theta in (-1.0, 0.0, 1.0):
        slope = (green_bar(theta, 0.5 + d) - green_bar(theta, 0.5 - d)) / (2 * d)
        assert slope == pytest.approx(green_G(theta, 0.5), abs=1e-5)


def test_G_bar_vanishes_at_zero():
    values = [green_bar(0.0, u) for u in (1e-2, 1e-4, 1e-8, 1e-16)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < 0.03


def test_G_bar_domain():
    with pytest.raises(DomainError):
        green_bar(0.0, 1.5)
    with pytest.raises(DomainError):
        green_bar(0.0, 0.0)


def test_G_domain():
    with pytest.raises(DomainError):
        green_G(0.0, 0.0)
    with pytest.raises(DomainError):
        green_G(0.0, 1.5)


def test_s_max_truncation():
    ev = GreenEvaluator(0.0)
    for t in (1e-6, 0.5, 1.0):
        smax = ev.s_max(t)
        g = ev.G(t)
        tail = smax * math.exp(-EULER_GAMMA * smax + (smax - 1.0) * math.log(t) - math.lgamma(smax + 1.0))
        assert tail <= 1e-16 * g


# ---------------------------------------------------------------------------
# t > 1


@pytest.mark.parametrize("theta", [-1.0, 0.0, 1.0])
def test_seam_matches(theta):
    assert abs(green_extend(theta, 1.0) - green_G(theta, 1.0)) <= 1e-6


@pytest.mark.parametrize("theta", [-1.0, 0.0, 1.0])
def test_seam_modulus(theta):
    # right of t = 1 the increment is of order 1/ln^2(1/delta)
    g1 = green_G(theta, 1.0)
    scaled = [
        (green_extend(theta, 1.0 + d) - g1) * math.log(1.0 / d) ** 2 / g1 for d in (1e-3, 1e-6, 1e-9)
    ]
    assert all(-5.0 < v <= 0.0 for v in scaled)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 1.5, 2.0])
def test_route_consistency(t):
    assert green_extend(0.0, t) == pytest.approx(green_direct(0.0, t), abs=1e-4)


@pytest.mark.parametrize("theta,t", [(1.0, 1.5), (-1.0, 2.5)])
def test_route_consistency_other_theta(theta, t):
    assert green_extend(theta, t) == pytest.approx(green_direct(theta, t), abs=1e-4)


def test_extension_positive():
    for t in np.linspace(1.01, 4.0, 13):
        assert green_extend(0.0, float(t)) > 0.0


def test_extension_cache_write_once():
    ev = GreenEvaluator(0.25)
    first = ev.extend(1.5)
    assert ev.extend(1.5) == first


# ---------------------------------------------------------------------------
# heat kernel


def test_heat_kernel_origin():
    assert heat_kernel(1.0, 1.0, [0.0, 0.0]) == pytest.approx(1.0 / (2 * math.pi), rel=1e-15)
    assert heat_kernel(1.0, 1.0, [0.0, 0.0]) == pytest.approx(0.1591549431, abs=1e-10)


def test_heat_kernel_quarter_variance():
    assert heat_kernel(0.25, 1.0, [1.0, 0.0]) == pytest.approx((2.0 / math.pi) * math.exp(-2.0), rel=1e-14)


def test_heat_kernel_mass():
    h = 0.01
    grid = np.arange(-800, 801) * h
    X, Y = np.meshgrid(grid, grid, indexing="ij")
    density = np.exp(-(X * X + Y * Y) / 2.0) / (2 * math.pi)
    inside = X * X + Y * Y <= 64.0
    assert heat_kernel(1.0, 1.0, [0.3, -0.2]) == pytest.approx(
        math.exp(-(0.09 + 0.04) / 2.0) / (2 * math.pi), rel=1e-14
    )
    assert abs(float(np.sum(density[inside])) * h * h - 1.0) < 1e-6


def test_heat_kernel_domain():
    with pytest.raises(DomainError):
        heat_kernel(1.0, 0.0, [0.0, 0.0])
    with pytest.raises(DomainError):
        heat_kernel(0.0, 1.0, [0.0, 0.0])


@given(
    st.floats(min_value=0.1, max_value=4.0),
    st.floats(min_value=0.1, max_value=4.0),
    st.floats(min_value=-5.0, max_value=5.0),
    st.floats(min_value=-5.0, max_value=5.0),
)
def test_heat_kernel_symmetric_and_scaling(c, t, x1, x2):
    assert heat_kernel(c, t, [x1, x2]) == heat_kernel(c, t, [-x1, -x2])
    assert heat_kernel(c, t, [x1, x2]) == pytest.approx(heat_kernel(1.0, c * t, [x1, x2]), rel=1e-12)


# ---------------------------------------------------------------------------
# space-time


def test_spacetime_origin():
    assert green_spacetime(0.0, 1.0, 1.0, [0.0, 0.0]) == pytest.approx(green_G(0.0, 1.0) / (2 * math.pi), rel=1e-12)


def test_spacetime_symmetric():
    a = green_spacetime(0.5, 0.25, 0.7, [0.4, -1.1])
    assert a == green_spacetime(0.5, 0.25, 0.7, [-0.4, 1.1])


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_spacetime_marginal(t):
    c = 0.25
    h = 0.05
    grid = np.arange(-60, 61) * h
    g = green_G(0.0, t)
    for x in ([0.0, 0.0], [0.3, -0.45], [1.0, 0.5]):
        assert green_spacetime(0.0, c, t, x) == pytest.approx(g * heat_kernel(c, t, x), rel=1e-12)
    mass = math.fsum(heat_kernel(c, t, [a, b]) for a in grid for b in grid) * h * h
    assert g * mass == pytest.approx(g, abs=1e-5)
