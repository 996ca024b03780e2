import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dickman import (
    build_density_grid,
    cdf_F,
    chernoff_tail,
    density_f,
    dickman_rho,
    rho_grid,
    small_time_constant,
)
from dickman.errors import DomainError, GridRangeError
from dickman.special import EULER_GAMMA

E_MINUS_GAMMA = math.exp(-EULER_GAMMA)

# rho(3) from the panel recursion at h = 2**-16 (about 60 s to rebuild).
RHO_3_FINE = 0.04860838829113151


# ---------------------------------------------------------------------------
# closed form on (0, 1]


def test_gamma_constant():
    assert EULER_GAMMA == 0.57721566490153286


def test_unit_density_is_flat():
    assert E_MINUS_GAMMA == pytest.approx(0.5614594836, abs=1e-10)
    for t in np.linspace(0.01, 1.0, 100):
        assert abs(density_f(1.0, float(t)) - E_MINUS_GAMMA) <= 1e-12


def test_density_examples():
    assert density_f(1.0, 0.5) == pytest.approx(E_MINUS_GAMMA, rel=1e-15)
    assert density_f(2.0, 1.0) == pytest.approx(math.exp(-2 * EULER_GAMMA), rel=1e-14)
    assert density_f(2.0, 1.0) == pytest.approx(0.3152367516871934, abs=1e-13)


def test_density_second_unit_closed_form():
    # On (1, 2]: f_1(t) = e^-gamma (1 - ln t).
    expected = E_MINUS_GAMMA * (1.0 - math.log(1.5))
    assert expected == pytest.approx(0.3338072533640839, rel=1e-15)
    assert density_f(1.0, 1.5) == pytest.approx(expected, abs=1e-10)
    for t in (1.1, 1.37, 1.9, 2.0):
        assert density_f(1.0, t) == pytest.approx(E_MINUS_GAMMA * (1.0 - math.log(t)), abs=1e-10)


@given(st.floats(min_value=0.05, max_value=4.0), st.floats(min_value=1e-3, max_value=1.0))
def test_closed_form_on_unit_interval(s, t):
    expected = s * t ** (s - 1.0) * math.exp(-EULER_GAMMA * s) / math.gamma(s + 1.0)
    assert density_f(s, t) == pytest.approx(expected, rel=1e-12)


def test_grid_matches_closed_form_on_unit_interval():
    for s in (0.3, 1.0, 2.5):
        grid = build_density_grid(s, h=2.0**-8, t_max=4.0)
        m = grid.per_unit
        t = grid.t[:m]
        exact = s * t ** (s - 1.0) * math.exp(-EULER_GAMMA * s) / math.gamma(s + 1.0)
        assert np.max(np.abs(grid.values[:m] - exact)) <= 1e-12


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
def test_seam_modulus(s):
    # Past t = 1 the density drops by f_s(1) * delta^s to leading order.
    f1 = density_f(s, 1.0)
    for delta in (1e-6, 1e-9):
        drop = f1 - density_f(s, 1.0 + delta)
        assert drop / (f1 * delta**s) == pytest.approx(1.0, abs=1e-3)


def test_seam_smooth_for_large_s():
    f1 = density_f(2.0, 1.0)
    assert density_f(2.0, 1.0 + 1e-9) == pytest.approx(f1, rel=1e-8)


def test_sato_identity():
    # The Levy measure dt/t on (0, 1) gives t f_s(t) = s * integral of f_s over (t - 1, t).
    for s in (1.0, 2.0, 3.0):
        grid = build_density_grid(s, h=2.0**-10, t_max=6.0)
        m = grid.per_unit
        f = np.concatenate(([0.0 if s > 1 else grid.values[0]], grid.values))
        for t_index in (int(1.5 * m), 2 * m, int(3.25 * m), 5 * m):
            t = t_index * grid.h
            window = f[t_index - m:t_index + 1]
            integral = grid.h * (math.fsum(window) - 0.5 * (window[0] + window[-1]))
            assert t * f[t_index] == pytest.approx(s * integral, abs=2e-6)


# ---------------------------------------------------------------------------
# Dickman function


def test_rho_flat_and_second_unit():
    assert dickman_rho(0.5) == 1.0
    assert dickman_rho(1.0) == 1.0
    assert dickman_rho(2.0) == pytest.approx(1.0 - math.log(2.0), abs=1e-15)
    t, rho = rho_grid(2.0)
    assert rho[-1] == pytest.approx(1.0 - math.log(2.0), abs=1e-8)


def test_rho_three_against_fine_grid():
    assert dickman_rho(3.0) == pytest.approx(RHO_3_FINE, abs=1e-8)


def test_rho_three_against_density_route():
    # rho = e^gamma f_1 computed through the density recursion.
    assert math.exp(EULER_GAMMA) * density_f(1.0, 3.0) == pytest.approx(dickman_rho(3.0), abs=1e-8)


def test_rho_monotone_positive():
    t, rho = rho_grid(10.0, h=2.0**-8)
    assert np.all(rho > 0.0)
    assert np.all(np.diff(rho[t >= 1.0]) <= 0.0)


def test_rho_ode_residual():
    h = 2.0**-10
    t, rho = rho_grid(5.0, h=h)
    m = round(1.0 / h)
    i = np.arange(m + 1, 5 * m)
    i = i[(i % m != 0) & (i % m != 1) & (i % m != m - 1)]  # rho' has kinks at integers
    deriv = (rho[i + 1] - rho[i - 1]) / (2 * h)
    assert np.max(np.abs(t[i] * deriv + rho[i - m])) < 1e-5


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_rho_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        dickman_rho(bad)


def test_rho_rejects_coarse_step():
    with pytest.raises(DomainError):
        dickman_rho(2.5, h=2.0**-4)


# ---------------------------------------------------------------------------
# distribution function


def test_cdf_examples():
    assert cdf_F(1.0, 1.0) == pytest.approx(E_MINUS_GAMMA, rel=1e-15)
    assert cdf_F(1.0, 0.5) == pytest.approx(0.5 * E_MINUS_GAMMA, rel=1e-15)
    assert cdf_F(1.0, 0.5) == pytest.approx(0.2807297418, abs=1e-10)
    assert cdf_F(2.0, 1e-12) < 1e-20


@given(st.floats(min_value=0.05, max_value=3.0), st.floats(min_value=1e-4, max_value=1.0))
def test_cdf_scaling(s, t):
    assert cdf_F(s, t) == pytest.approx(t**s * cdf_F(s, 1.0), rel=1e-13)


def test_cdf_increasing_beyond_one():
    ts = np.linspace(1.0, 8.0, 57)
    values = [cdf_F(1.5, float(t)) for t in ts]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] <= 1.0


def test_cdf_against_density_integral():
    # F(2) - F(1) = integral of e^-gamma (1 - ln t) over (1, 2] = e^-gamma (2 - 2 ln 2).
    assert cdf_F(1.0, 2.0) - cdf_F(1.0, 1.0) == pytest.approx(E_MINUS_GAMMA * (2.0 - 2.0 * math.log(2.0)), abs=1e-9)


def test_beyond_grid_raises():
    with pytest.raises(GridRangeError):
        density_f(1.0, 20.0)
    with pytest.raises(GridRangeError):
        cdf_F(1.0, 20.0, t_max=8.0)


@pytest.mark.parametrize("s,t", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_domain_errors(s, t):
    with pytest.raises(DomainError):
        density_f(s, t)
    with pytest.raises(DomainError):
        cdf_F(s, t)


# ---------------------------------------------------------------------------
# normalization and semigroup


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_grid_cdf_mass_bounded(s):
    grid = build_density_grid(s, t_max=12.0)
    assert np.all(grid.values >= 0.0)
    assert grid.cdf[-1] <= 1.0 + 1e-9


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_normalization_with_tail_bound(s):
    grid = build_density_grid(s, t_max=12.0)
    tail = chernoff_tail(s, 12.0)
    assert tail < 1e-6
    assert abs(grid.trapezoid_mass() + tail - 1.0) < 1e-6


def test_chernoff_tail_dominates_grid_tail():
    for s in (0.5, 1.0, 2.0):
        for t in (2.0, 4.0, 6.0):
            assert chernoff_tail(s, t) >= 1.0 - cdf_F(s, t) - 1e-9


@pytest.mark.parametrize("s", [2.0, 3.0])
def test_semigroup(s):
    h = 2.0**-10
    half = build_density_grid(s / 2.0, h=h, t_max=6.0)
    full = build_density_grid(s, h=h, t_max=6.0)
    f = np.concatenate(([0.0 if s / 2.0 > 1 else half.values[0]], half.values))
    conv = np.convolve(f, f)[: f.size] * h
    # trapezoid end corrections
    conv -= 0.5 * h * (f[0] * f + f * f[0])
    target = np.concatenate(([0.0], full.values))
    assert np.max(np.abs(conv[1:] - target[1:])) < 5e-4


@pytest.mark.parametrize("s", [0.01, 0.03, 0.05, 0.1])
def test_small_time_tail(s):
    tail = 1.0 - small_time_constant(s)
    assert 0.0 <= tail <= 2.0 * s * s


@given(st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=1.0, max_value=6.0))
def test_density_nonnegative_and_bounded(s, t):
    value = density_f(s, t, h=2.0**-8, t_max=6.0)
    assert value >= 0.0
    assert cdf_F(s, t, h=2.0**-8, t_max=6.0) <= 1.0
