"""Second moments of the disordered pinning and directed-polymer models.

Both models reduce to renewal densities. With ``sigma2 = sigma_beta^2`` and
``lam = sigma2 R_N``:

* pinning, constrained: ``E[Z_n^2] = U_{N,lam}(n) / sigma2`` for the law
  ``r(n)/R_N`` with ``r(n) = u(n)^2`` and ``u(n) = binom(2n, n) / 4^n``;
* pinning, free: ``E[(Z_n^f)^2] = 1 + sum_{l=1}^n U_{N,lam}(l)``;
* polymer, constrained: ``E[Z_n(x)^2] = bsU_{N,lam}(n, x) / sigma2`` for the
  space-time law ``q_m(x)^2 / R_N``;
* polymer, free: the same value as for pinning.

The chaos-sum oracles at the bottom enumerate time tuples directly and share
no code with the renewal recursions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.signal import convolve2d

from .errors import DomainError, VerificationError
from .green import heat_kernel
from .renewal.density import renewal_density
from .renewal.laws import InterArrivalLaw
from .renewal.spacetime import (
    SpaceTimeLaw,
    spacetime_point_density,
    spacetime_renewal_density,
)
from .special import EULER_GAMMA, log_gamma

ALPHA = EULER_GAMMA + math.log(16.0) - math.pi
FREE_IDENTITY_RTOL = 1e-10
_LOG_BLOCK = 256
_STIRLING_FROM = 256


# ---------------------------------------------------------------------------
# disorder


def _gaussian_cgf(beta: float) -> float:
    return 0.5 * beta * beta


def _rademacher_cgf(beta: float) -> float:
    b = abs(beta)
    if b < 1.0:
        # cosh b - 1 = 2 sinh(b/2)^2 without cancellation
        return math.log1p(2.0 * math.sinh(0.5 * b) ** 2)
    return b + math.log1p(math.exp(-2.0 * b)) - math.log(2.0)


@dataclass(frozen=True)
class DisorderSpec:
    """Law of the disorder through its log-moment generating function.

    Attributes
    ----------
    cgf : callable
        ``beta -> log E[exp(beta omega)]``, finite for all ``beta > 0``.
    kappa3, kappa4 : float
        Third and fourth cumulants of ``omega``.
    name : str
    """

    cgf: Callable[[float], float] = field(repr=False)
    kappa3: float = 0.0
    kappa4: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if abs(self.cgf(0.0)) > 1e-15:
            raise DomainError("cgf(0) must vanish")
        grid = np.linspace(0.0, 4.0, 41)
        vals = np.array([self.cgf(float(b)) for b in grid])
        if not np.all(np.isfinite(vals)):
            raise DomainError("cgf must be finite for beta >= 0")
        second = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
        if np.any(second < -1e-12 * (1.0 + np.abs(vals[1:-1]))):
            raise DomainError("cgf is not convex")

    def sigma2(self, beta: float) -> float:
        return sigma_beta2(self, beta)


GAUSSIAN = DisorderSpec(_gaussian_cgf, 0.0, 0.0, "gaussian")
RADEMACHER = DisorderSpec(_rademacher_cgf, 0.0, -2.0, "rademacher")
DISORDERS = {"gaussian": GAUSSIAN, "rademacher": RADEMACHER}


def disorder(name: str) -> DisorderSpec:
    try:
        return DISORDERS[name]
    except KeyError:
        raise DomainError(f"unknown disorder {name!r}; choose from {sorted(DISORDERS)}") from None


def sigma_beta2(d: DisorderSpec, beta: float) -> float:
    """``exp(cgf(2 beta) - 2 cgf(beta)) - 1``.

    Examples
    --------
    >>> round(sigma_beta2(GAUSSIAN, 1.0), 12) == round(math.e - 1, 12)
    True
    """
    beta = float(beta)
    if not beta >= 0.0:
        raise DomainError("beta must be non-negative")
    if beta == 0.0:
        return 0.0
    out = math.expm1(d.cgf(2.0 * beta) - 2.0 * d.cgf(beta))
    if out < 0.0:
        raise DomainError(f"sigma^2 < 0 at beta={beta}; the cgf is not convex")
    return out


def beta_from_sigma2(d: DisorderSpec, target: float) -> float:
    """Invert :func:`sigma_beta2` by bisection.

    The upper end of the bracket doubles from 1 until it encloses the
    target, then bisection runs until the bracket stops shrinking, which is
    well below ``1e-14`` relative.

    Raises
    ------
    DomainError
        For a negative target, or when ``sigma_beta2`` is found not to
        increase along the bracket.
    """
    target = float(target)
    if not target >= 0.0:
        raise DomainError("target sigma^2 must be non-negative")
    if target == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    prev = 0.0
    while True:
        val = sigma_beta2(d, hi)
        if val < prev * (1.0 - 1e-12):
            raise DomainError(f"sigma^2 is not increasing in beta for {d.name}")
        if val >= target:
            break
        if val <= prev or hi > 1e6:
            raise DomainError(
                f"sigma^2 = {target!r} is out of reach for {d.name}; it levels off near {val!r}"
            )
        lo, prev, hi = hi, val, 2.0 * hi
    grid = np.linspace(lo, hi, 17)
    vals = [sigma_beta2(d, float(b)) for b in grid]
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise DomainError(f"sigma^2 is not increasing in beta for {d.name}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sigma_beta2(d, mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def critical_sigma2(N: int, theta: float) -> float:
    """``(1 + theta/ln N) / R_N``."""
    if N < 2:
        raise DomainError("N must be at least 2")
    return (1.0 + float(theta) / math.log(N)) / pinning_weights(N).R_N


def beta_for_theta(d: DisorderSpec, N: int, theta: float) -> float:
    """Disorder strength of the critical window at cutoff ``N``.

    Raises
    ------
    DomainError
        When ``1 + theta/ln N < 0``.
    """
    target = critical_sigma2(N, theta)
    if target < 0.0:
        raise DomainError(f"theta={theta} gives sigma^2 < 0 at N={N}")
    return beta_from_sigma2(d, target)


def series_beta2(d: DisorderSpec, epsilon: float) -> float:
    """Small-``epsilon`` expansion of ``beta^2`` solving ``sigma_beta^2 = epsilon``."""
    eps = float(epsilon)
    if eps < 0.0:
        raise DomainError("epsilon must be non-negative")
    k3, k4 = d.kappa3, d.kappa4
    return eps - k3 * eps**1.5 + (1.5 * k3 * k3 - 7.0 / 12.0 * k4 - 0.5) * eps * eps


# ---------------------------------------------------------------------------
# pinning


def log_return_probability(n: int) -> float:
    """``ln u(n)`` with ``u(n) = binom(2n, n) / 4^n``, valid for large ``n``."""
    n = int(n)
    if n < 0:
        raise DomainError("n must be non-negative")
    if n < _STIRLING_FROM:
        return math.fsum(math.log1p(-0.5 / k) for k in range(1, n + 1))
    # Stirling series of ln Gamma(2n+1) - 2 ln Gamma(n+1) - n ln 4; the
    # direct difference loses digits to cancellation for large n.
    inv = 1.0 / n
    return -0.5 * math.log(math.pi * n) + inv * (-0.125 + inv * inv * (1.0 / 192.0 - inv * inv / 640.0))


def _log_u_table(N: int) -> np.ndarray:
    # u(n) = u(n-1) (1 - 1/(2n)); a running sum of logs keeps full relative
    # accuracy where differences of log-gammas would not.
    # Prefix sums run in blocks with exact offsets so rounding does not build
    # up over long tables.
    k = np.arange(1, N + 1, dtype=float)
    terms = np.log1p(-0.5 / k)
    out = np.empty(N)
    hi = lo_err = 0.0  # offset carried as an unevaluated sum hi + lo_err
    for lo in range(0, N, _LOG_BLOCK):
        block = terms[lo:lo + _LOG_BLOCK]
        out[lo:lo + block.size] = hi + (lo_err + np.cumsum(block))
        b = math.fsum(block)
        t = hi + b
        lo_err += (hi - t) + b if abs(hi) >= abs(b) else (b - t) + hi
        hi = t
    return out


@lru_cache(maxsize=64)
def pinning_weights(N: int) -> InterArrivalLaw:
    """Law ``r(n)/R_N`` with ``r(n) = u(n)^2`` for ``1 <= n <= N``.

    Examples
    --------
    >>> law = pinning_weights(2)
    >>> float(law.r[0]), float(law.r[1])
    (0.25, 0.140625)
    """
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    u = np.exp(_log_u_table(N))
    return InterArrivalLaw.from_weights(u * u, name="pinning")


def alpha_check(N: int) -> dict:
    """``R_N`` and the residual ``pi R_N - ln N - alpha``."""
    N = int(N)
    if N < 1:
        raise DomainError("N must be at least 1")
    R = pinning_weights(N).R_N
    return {"R_N": R, "residual": math.pi * R - math.log(N) - ALPHA}


def _check_moment_args(n: int, N: int) -> None:
    if not 1 <= n <= N:
        raise DomainError("need 1 <= n <= N")


def pinning_second_moment_sigma2(n: int, N: int, sigma2: float) -> float:
    _check_moment_args(n, N)
    law = pinning_weights(N)
    if sigma2 == 0.0:
        return float(law.r[n - 1])
    return float(renewal_density(law, sigma2 * law.R_N, n)[n]) / sigma2


def pinning_free_second_moment_sigma2(n: int, N: int, sigma2: float) -> float:
    _check_moment_args(n, N)
    if sigma2 == 0.0:
        return 1.0
    law = pinning_weights(N)
    U = renewal_density(law, sigma2 * law.R_N, n)
    return 1.0 + math.fsum(U.U[1:])


def pinning_second_moment(n: int, N: int, beta: float, d: DisorderSpec = GAUSSIAN) -> float:
    """``E[Z_n^2]`` for the constrained pinning model.

    Parameters
    ----------
    n : int
        Length, ``1 <= n <= N``.
    N : int
        Cutoff of the renewal array; the value does not depend on it.
    beta : float
        Disorder strength; ``beta = 0`` returns ``u(n)^2``.
    d : DisorderSpec
    """
    return pinning_second_moment_sigma2(n, N, sigma_beta2(d, beta))


def pinning_free_second_moment(n: int, N: int, beta: float, d: DisorderSpec = GAUSSIAN) -> float:
    """``E[(Z_n^f)^2] = 1 + sum_{l<=n} U(l)``."""
    return pinning_free_second_moment_sigma2(n, N, sigma_beta2(d, beta))


# ---------------------------------------------------------------------------
# directed polymer


def _log_w_row(n: int) -> np.ndarray:
    """``ln(binom(n, k) / 2^n)`` for ``k = 0..n`` by running log-ratios."""
    if n == 0:
        return np.zeros(1)
    i = np.arange(1, n + 1, dtype=float)
    steps = np.log((n - i + 1.0) / i)
    return np.concatenate(([0.0], np.cumsum(steps))) - n * math.log(2.0)


def _w_squared(n: int) -> np.ndarray:
    """``w_n(j)^2`` on ``j = -n..n`` with zeros off parity."""
    out = np.zeros(2 * n + 1)
    out[::2] = np.exp(2.0 * _log_w_row(n))
    return out


def polymer_kernel_q(n: int, x) -> float:
    """``P(S_n = x)`` for the simple random walk on ``Z^2``.

    Uses the factorization over the two diagonals,
    ``q_n(x) = w_n(x_1 + x_2) w_n(x_1 - x_2)`` with ``w_n`` the one-dimensional
    walk law.

    Examples
    --------
    >>> polymer_kernel_q(1, (1, 0))
    0.25
    >>> polymer_kernel_q(1, (0, 0))
    0.0
    """
    n = int(n)
    if n < 0:
        raise DomainError("n must be non-negative")
    x1, x2 = (int(v) for v in x)
    out = 1.0
    for j in (x1 + x2, x1 - x2):
        if abs(j) > n or (n + j) % 2:
            return 0.0
        k = (n + j) // 2
        out *= math.exp(log_gamma(n + 1) - log_gamma(k + 1) - log_gamma(n - k + 1) - n * math.log(2.0))
    return out


def polymer_q_squared(n: int) -> tuple[np.ndarray, int]:
    """``q_n(x)^2`` on the box ``[-n, n]^2`` and the radius ``n``."""
    n = int(n)
    wsq = _w_squared(n)
    x = np.arange(-n, n + 1)
    a = x[:, None] + x[None, :]
    b = x[:, None] - x[None, :]
    ok = (np.abs(a) <= n) & (np.abs(b) <= n)
    out = np.zeros((2 * n + 1, 2 * n + 1))
    out[ok] = wsq[a[ok] + n] * wsq[b[ok] + n]
    return out, n


@lru_cache(maxsize=16)
def polymer_spacetime_law(N: int) -> SpaceTimeLaw:
    """Space-time law ``q_n(x)^2 / R_N`` on ``{1..N} x Z^2``.

    ``p(n, .) = q_n(.)^2 / u(n)^2`` has variance ``n^2/(2(2n - 1))`` per
    component, so ``c = 1/4`` in the limit. It lives on the checkerboard.
    Its Fourier transform factorizes over the diagonals, so tables are
    one-dimensional.
    """
    N = int(N)
    base = pinning_weights(N)
    cache: dict[int, tuple[np.ndarray, int]] = {}

    def kernel(n: int) -> tuple[np.ndarray, int]:
        if n not in cache:
            arr, rad = polymer_q_squared(n)
            arr = arr / math.fsum(arr.ravel())
            arr.flags.writeable = False
            cache[n] = (arr, rad)
        return cache[n]

    @lru_cache(maxsize=4)
    def diagonal_table(m_max: int, L: int) -> np.ndarray:
        # psi[m, j] = sum_a w_m(a)^2 / u(m) cos(2 pi j a / (2L))
        period = 2 * L
        folded = np.zeros((m_max + 1, period))
        for m in range(1, m_max + 1):
            wsq = _w_squared(m)
            np.add.at(folded[m], np.arange(-m, m + 1) % period, wsq / wsq.sum())
        psi = np.fft.fft(folded, axis=1).real
        psi.flags.writeable = False
        return psi

    def fourier(m_max: int, L: int, modes: np.ndarray) -> np.ndarray:
        psi = diagonal_table(m_max, L)
        period = 2 * L
        plus = (modes[:, 0] + modes[:, 1]) % period
        minus = (modes[:, 0] - modes[:, 1]) % period
        out = psi[:, plus] * psi[:, minus]
        out[0] = 0.0
        return out

    @lru_cache(maxsize=1024)
    def diagonal_cdf(m: int) -> np.ndarray:
        return np.cumsum(_w_squared(m))

    def sampler(m: int, u: np.ndarray) -> np.ndarray:
        # the two diagonal coordinates are independent with law w_m^2 / u(m)
        cdf = diagonal_cdf(m)
        idx = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), cdf.size - 1)
        a, b = idx[:, 0] - m, idx[:, 1] - m
        return np.stack([(a + b) // 2, (a - b) // 2], axis=1)

    return SpaceTimeLaw(
        base=base, d=2, c=0.25, kernel=kernel, reach_per_step=1.0,
        checkerboard=True, symmetric=True, fourier=fourier, name="polymer",
        sampler=sampler,
    )


def _parity_ok(n: int, x) -> bool:
    return (int(x[0]) + int(x[1]) - n) % 2 == 0


def polymer_second_moment_sigma2(n: int, x, N: int, sigma2: float) -> float:
    _check_moment_args(n, N)
    x = tuple(int(v) for v in x)
    if not _parity_ok(n, x):
        return 0.0
    if sigma2 == 0.0:
        return polymer_kernel_q(n, x) ** 2
    law = polymer_spacetime_law(N)
    return spacetime_point_density(law, sigma2 * law.base.R_N, n, x) / sigma2


def polymer_second_moment(n: int, x, N: int, beta: float, d: DisorderSpec = GAUSSIAN) -> float:
    """``E[Z_n(x)^2]`` for the point-to-point directed polymer.

    Returns exactly ``0.0`` when ``x_1 + x_2`` and ``n`` differ in parity.
    """
    return polymer_second_moment_sigma2(n, x, N, sigma_beta2(d, beta))


def polymer_free_second_moment_sigma2(n: int, N: int, sigma2: float) -> float:
    _check_moment_args(n, N)
    if sigma2 == 0.0:
        return 1.0
    law = polymer_spacetime_law(N)
    dens = spacetime_renewal_density(law, sigma2 * law.base.R_N, n)
    value = 1.0 + math.fsum(dens.marginal()[1:])
    other = pinning_free_second_moment_sigma2(n, N, sigma2)
    if abs(value - other) > FREE_IDENTITY_RTOL * abs(other):
        raise VerificationError(f"free moments differ: polymer {value!r}, pinning {other!r}")
    return value


def polymer_free_second_moment(n: int, N: int, beta: float, d: DisorderSpec = GAUSSIAN) -> float:
    """``E[(Z_n^f)^2]`` for the free polymer from the space-time field.

    Raises
    ------
    VerificationError
        If the value disagrees with the pinning free moment.
    """
    return polymer_free_second_moment_sigma2(n, N, sigma_beta2(d, beta))


def polymer_limit(N: int, theta: float, t: float, x_scaled, green: Callable[[float, float], float]) -> float:
    """``(ln N)^2/(pi N^2) G_theta(t) g_{t/4}(x_scaled) 2``, the large-``N`` moment."""
    return (math.log(N) ** 2 / (math.pi * N * N)) * green(theta, t) * heat_kernel(0.25, t, x_scaled) * 2.0


# ---------------------------------------------------------------------------
# chaos-sum oracles (exponential time)


def _time_tuples(n: int):
    """All ``0 = n_0 < n_1 < ... < n_k = n`` as gap tuples."""
    for k in range(1, n + 1):
        for cuts in itertools.combinations(range(1, n), k - 1):
            points = (0,) + cuts + (n,)
            yield tuple(b - a for a, b in zip(points, points[1:]))


def pinning_chaos_sum(n: int, sigma2: float) -> float:
    """``sum_k sigma2^(k-1) sum_{0<n_1<...<n_k=n} prod u(n_i - n_{i-1})^2``."""
    r = [0.0] + [math.exp(2.0 * log_return_probability(m)) for m in range(1, n + 1)]
    terms = []
    for gaps in _time_tuples(n):
        terms.append(sigma2 ** (len(gaps) - 1) * math.prod(r[g] for g in gaps))
    return math.fsum(terms)


def pinning_free_chaos_sum(n: int, sigma2: float) -> float:
    """``1 + sum_k sigma2^k sum_{0<n_1<...<n_k<=n} prod u(n_i - n_{i-1})^2``."""
    return 1.0 + sigma2 * math.fsum(pinning_chaos_sum(m, sigma2) for m in range(1, n + 1))


def polymer_chaos_table(n: int, sigma2: float) -> tuple[np.ndarray, int]:
    """Constrained polymer chaos sum at every ``x`` in ``[-n, n]^2``.

    Each time tuple contributes the direct convolution of the ``q^2`` arrays
    of its gaps.
    """
    q2 = {m: polymer_q_squared(m)[0] for m in range(1, n + 1)}
    total = np.zeros((2 * n + 1, 2 * n + 1))
    for gaps in _time_tuples(n):
        acc = q2[gaps[0]]
        for g in gaps[1:]:
            acc = convolve2d(acc, q2[g])
        total += sigma2 ** (len(gaps) - 1) * acc
    return total, n
