"""Exponentially weighted renewal densities and exact k-step laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import DomainError
from .laws import InterArrivalLaw


@dataclass(frozen=True)
class RenewalDensity:
    """``U(n) = sum_k lam^k P(tau_k = n)`` for ``n = 0..n_max``."""

    law: str
    N: int
    lam: float
    U: np.ndarray = field(repr=False)

    def __getitem__(self, n: int) -> float:
        return float(self.U[n])

    @property
    def n_max(self) -> int:
        return self.U.size - 1


def renewal_density(law: InterArrivalLaw, lam: float, n_max: int) -> RenewalDensity:
    """Renewal density by the one-step recursion.

    ``U(0) = 1`` and ``U(n) = lam sum_{m=1}^{min(n, N)} P(T = m) U(n - m)``,
    costing ``O(n_max min(n_max, N))``.

    Parameters
    ----------
    law : InterArrivalLaw
    lam : float
        Non-negative weight per renewal.
    n_max : int
        Last index computed.

    Raises
    ------
    DomainError
        For negative ``lam`` or ``n_max``.
    OverflowError
        When a value exceeds ``1e300``.
    """
    lam = float(lam)
    if not lam >= 0.0 or not math.isfinite(lam):
        raise DomainError(f"lambda must be finite and non-negative, got {lam!r}")
    n_max = int(n_max)
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    u = kernels.renewal_recursion(law.pmf, lam, n_max)
    u.flags.writeable = False
    return RenewalDensity(law=law.name, N=law.N, lam=lam, U=u)


def exact_tau_pmf(law: InterArrivalLaw, k: int, n_max: int | None = None) -> tuple[np.ndarray, float]:
    """Law of ``tau_k = T_1 + ... + T_k`` by repeated convolution.

    Parameters
    ----------
    law : InterArrivalLaw
    k : int
        Number of steps, ``k >= 0``.
    n_max : int, optional
        Truncation point. Defaults to the full support ``k N``.

    Returns
    -------
    pmf : ndarray
        ``P(tau_k = n)`` for ``n = 0..n_max``.
    beyond : float
        ``P(tau_k > n_max)``, accumulated from the discarded convolution mass.
    """
    k = int(k)
    if k < 0:
        raise DomainError("k must be non-negative")
    if n_max is None:
        n_max = k * law.N
    pmf = np.zeros(n_max + 1)
    pmf[0] = 1.0
    step = law.pmf
    beyond = 0.0
    for _ in range(k):
        full = np.convolve(pmf, step)
        beyond += math.fsum(full[n_max + 1:])
        pmf = full[: n_max + 1]
    return pmf, beyond


def all_tau_pmfs(law: InterArrivalLaw, k_max: int, n_max: int | None = None) -> np.ndarray:
    """Rows ``P(tau_k = n)`` for ``k = 0..k_max`` and ``n = 0..n_max``."""
    if n_max is None:
        n_max = k_max * law.N
    out = np.zeros((k_max + 1, n_max + 1))
    out[0, 0] = 1.0
    step = law.pmf
    for k in range(1, k_max + 1):
        out[k] = np.convolve(out[k - 1], step)[: n_max + 1]
    return out


def renewal_by_k_sum(law: InterArrivalLaw, lam: float, n_max: int) -> np.ndarray:
    """Definitional ``sum_{k <= n} lam^k P(tau_k = n)``; terms with ``k > n`` vanish."""
    rows = all_tau_pmfs(law, n_max, n_max)
    powers = float(lam) ** np.arange(n_max + 1)
    return np.array([math.fsum(powers * rows[:, n]) for n in range(n_max + 1)])


def straddle_sum(density: RenewalDensity, law: InterArrivalLaw, n: int, n_bar: int) -> float:
    """``lam sum_{0 <= l < n_bar <= m <= n} U(l) P(T = m - l) U(n - m)``.

    Equals ``U(n)`` for ``1 <= n_bar <= n``: the renewal straddling
    ``n_bar`` is singled out.
    """
    if not 1 <= n_bar <= n <= density.n_max:
        raise DomainError("need 1 <= n_bar <= n <= n_max")
    u = density.U
    pmf = law.pmf
    terms = []
    for l in range(n_bar):
        for m in range(n_bar, min(n, l + law.N) + 1):
            terms.append(u[l] * pmf[m - l] * u[n - m])
    return density.lam * math.fsum(terms)
