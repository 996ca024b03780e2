import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dickman import green_direct
from dickman.errors import DomainError
from dickman.renewal import (
    InterArrivalLaw,
    all_tau_pmfs,
    exact_tau_pmf,
    lambda_for_theta,
    law_from_harmonic,
    renewal_by_k_sum,
    renewal_density,
    straddle_sum,
    verify_renewal_theorem,
)
from dickman.special import EULER_GAMMA

# ---------------------------------------------------------------------------
# laws


def test_harmonic_two():
    law = law_from_harmonic(2)
    assert law.prob(1) == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert law.prob(2) == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert law.prob(3) == 0.0


def test_harmonic_one_degenerate():
    law = law_from_harmonic(1)
    assert law.prob(1) == 1.0
    assert law.cdf(1) == 1.0


def test_harmonic_normalizer():
    N = 10**4
    law = law_from_harmonic(N)
    assert abs(law.R_N - math.log(N) - EULER_GAMMA) < 1e-4
    # Euler-Maclaurin: H_N = ln N + gamma + 1/(2N) - 1/(12 N^2) + ...
    assert law.R_N == pytest.approx(math.log(N) + EULER_GAMMA + 0.5 / N - 1.0 / (12.0 * N * N), abs=4e-15)


@pytest.mark.parametrize("N", [1, 7, 64, 10**5])
def test_pmf_sums_to_one(N):
    law = law_from_harmonic(N)
    assert abs(math.fsum(law.pmf) - 1.0) <= 1e-14
    assert np.all(law.r > 0)


def test_cdf_steps():
    law = law_from_harmonic(4)
    total = 1 + 1 / 2 + 1 / 3 + 1 / 4
    assert law.cdf(0) == 0.0
    assert law.cdf(2) == pytest.approx(1.5 / total, rel=1e-15)
    assert law.cdf(9) == 1.0


def test_from_weights_rejects():
    with pytest.raises(DomainError):
        InterArrivalLaw.from_weights([1.0, 0.0])
    with pytest.raises(DomainError):
        InterArrivalLaw.from_weights([])
    with pytest.raises(DomainError):
        law_from_harmonic(0)


def test_lambda_for_theta():
    N = math.exp(2.0)
    assert lambda_for_theta(N, 0.0) == 1.0
    assert lambda_for_theta(N, 2.0) == pytest.approx(2.0, rel=1e-15)
    assert lambda_for_theta(10**6, -1.0) == pytest.approx(1.0 - 1.0 / (6.0 * math.log(10.0)), rel=1e-15)
    with pytest.raises(DomainError):
        lambda_for_theta(1, 0.0)


# ---------------------------------------------------------------------------
# renewal density


def test_density_examples():
    u = renewal_density(law_from_harmonic(2), 1.0, 4)
    assert u[0] == 1.0
    assert u[1] == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert u[2] == pytest.approx(7.0 / 9.0, rel=1e-15)


def _exact_u(weights, lam, n_max):
    # rational arithmetic over all compositions of n
    R = sum(weights)
    p = [Fraction(0)] + [w / R for w in weights]
    u = [Fraction(1)]
    for n in range(1, n_max + 1):
        u.append(lam * sum(p[m] * u[n - m] for m in range(1, min(n, len(weights)) + 1)))
    return u


def test_density_against_rationals():
    weights = [Fraction(1, k) for k in range(1, 6)]
    exact = _exact_u(weights, Fraction(3, 2), 12)
    u = renewal_density(law_from_harmonic(5), 1.5, 12)
    for n in range(13):
        assert u[n] == pytest.approx(float(exact[n]), rel=1e-14)


def test_density_lambda_zero():
    u = renewal_density(law_from_harmonic(5), 0.0, 10)
    assert u[0] == 1.0
    assert np.all(u.U[1:] == 0.0)


def test_density_rejects():
    with pytest.raises(DomainError):
        renewal_density(law_from_harmonic(5), -1.0, 10)
    with pytest.raises(DomainError):
        renewal_density(law_from_harmonic(5), 1.0, -1)


def test_density_overflow_guard():
    with pytest.raises(OverflowError):
        renewal_density(law_from_harmonic(4), 1e3, 400)


def test_density_readonly():
    u = renewal_density(law_from_harmonic(3), 1.0, 5)
    with pytest.raises(ValueError):
        u.U[0] = 2.0


# ---------------------------------------------------------------------------
# k-step laws


def test_tau_pmf_trivial():
    law = law_from_harmonic(6)
    pmf, beyond = exact_tau_pmf(law, 0, 10)
    assert pmf[0] == 1.0 and pmf[1:].sum() == 0.0 and beyond == 0.0
    pmf, _ = exact_tau_pmf(law, 1)
    assert np.array_equal(pmf, law.pmf)


def test_tau_pmf_two_steps():
    pmf, beyond = exact_tau_pmf(law_from_harmonic(2), 2)
    assert pmf[2] == pytest.approx(4 / 9, rel=1e-15)
    assert pmf[3] == pytest.approx(4 / 9, rel=1e-15)
    assert pmf[4] == pytest.approx(1 / 9, rel=1e-15)
    assert beyond == 0.0


def test_tau_pmf_truncation_mass():
    pmf, beyond = exact_tau_pmf(law_from_harmonic(8), 4, 12)
    full, _ = exact_tau_pmf(law_from_harmonic(8), 4)
    assert math.fsum(pmf) + beyond == pytest.approx(1.0, abs=1e-15)
    assert beyond == pytest.approx(math.fsum(full[13:]), abs=1e-15)


def test_tau_pmf_brute_force():
    law = law_from_harmonic(4)
    k = 3
    pmf, _ = exact_tau_pmf(law, k)
    brute = np.zeros(k * 4 + 1)
    for steps in product(range(1, 5), repeat=k):
        brute[sum(steps)] += math.prod(law.prob(m) for m in steps)
    assert np.allclose(pmf, brute, rtol=0, atol=1e-16)


@pytest.mark.parametrize("N", [1, 2, 5, 17, 32])
@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
def test_recursion_equals_k_sum(N, lam):
    # 1e-12 absolute, scaled up where U exceeds 1 (one ulp of 1e4 is already 2e-12)
    law = law_from_harmonic(N)
    u = renewal_density(law, lam, 32).U
    ref = renewal_by_k_sum(law, lam, 32)
    assert np.all(np.abs(u - ref) <= 1e-12 * np.maximum(1.0, np.abs(ref)))


@pytest.mark.parametrize("n_bar", [1, 3, 7, 12])
def test_straddle_identity(n_bar):
    law = law_from_harmonic(5)
    u = renewal_density(law, 1.3, 12)
    assert straddle_sum(u, law, 12, n_bar) == pytest.approx(u[12], abs=1e-12)


def test_straddle_rejects():
    law = law_from_harmonic(5)
    u = renewal_density(law, 1.0, 6)
    with pytest.raises(DomainError):
        straddle_sum(u, law, 6, 0)


@given(
    st.lists(st.floats(min_value=1e-3, max_value=10.0), min_size=1, max_size=12),
    st.floats(min_value=0.0, max_value=2.0),
)
def test_recursion_k_sum_property(weights, lam):
    law = InterArrivalLaw.from_weights(weights)
    u = renewal_density(law, lam, 16)
    ref = renewal_by_k_sum(law, lam, 16)
    assert u[0] == 1.0
    assert np.all(u.U >= 0.0)
    assert np.allclose(u.U, ref, rtol=1e-12, atol=1e-14)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=6))
def test_tau_rows_are_probabilities(N, k):
    rows = all_tau_pmfs(law_from_harmonic(N), 6)
    assert math.fsum(rows[k]) == pytest.approx(1.0, abs=1e-14)
    assert np.all(rows[k, :k] == 0.0)  # tau_k >= k


@given(st.integers(min_value=2, max_value=40), st.floats(min_value=0.1, max_value=1.0))
def test_lambda_one_is_renewal_probability(N, _):
    # at lam = 1, U(n) is the probability that n is a renewal time
    u = renewal_density(law_from_harmonic(N), 1.0, 3 * N)
    assert np.all(u.U <= 1.0 + 1e-14)


# ---------------------------------------------------------------------------
# sharp renewal theorem sweeps


def test_renewal_theorem_half():
    report = verify_renewal_theorem([2**10, 2**13, 2**16], 0.0, 0.5)
    assert report.monotone
    assert report.final_error < 0.1
    # frozen at build time
    assert report.errors == pytest.approx((0.0833, 0.0641, 0.0520), abs=5e-4)


def test_renewal_theorem_boundary():
    report = verify_renewal_theorem([2**10, 2**13, 2**16], 0.0, 1.0)
    assert report.monotone
    assert report.final_error < 0.1


def test_renewal_theorem_route_independent():
    a = verify_renewal_theorem([2**10, 2**13, 2**16], 0.0, 0.5)
    b = verify_renewal_theorem([2**10, 2**13, 2**16], 0.0, 0.5, green=green_direct)
    assert b.monotone == a.monotone
    assert b.passes(0.1) == a.passes(0.1)
    assert b.ratios == pytest.approx(a.ratios, rel=1e-6)


def test_renewal_theorem_rejects():
    with pytest.raises(DomainError):
        verify_renewal_theorem([64], 0.0, 1.5)
    with pytest.raises(DomainError):
        verify_renewal_theorem([1], 0.0, 0.5)
