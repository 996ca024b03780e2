"""Exact evaluation of the local and tail inequalities for renewal arrays.

Each evaluator returns the exact left-hand side from convolution, the
right-hand side for given constants, and the comparison. The constants in
the inequalities are only claimed to exist; the sweeps below find the best
ones on a finite range, and :data:`FROZEN` records those values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import lambertw

from ..errors import DomainError
from .density import all_tau_pmfs
from .laws import law_from_harmonic

# Empirical constants found by the sweeps below over m, N <= 64 and k, n <= 64.
# The sharp local C is attained at k = 1, the lower-tail c at m = 1, k = n.
FROZEN = {
    "sharp_local_c": 0.05,
    "sharp_local_C": 1.0,
    "fuk_nagaev_C": 1.142,
    "lower_tail_c": 1.0,
}


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


_K_BLOCK = 64


@lru_cache(maxsize=256)
def _tau_table_block(N: int, k_max: int) -> np.ndarray:
    table = all_tau_pmfs(law_from_harmonic(N), k_max)
    table.flags.writeable = False
    return table


def _tau_table(N: int, k_max: int) -> np.ndarray:
    """``P(tau_k = n)`` over ``(k, n)`` with full support, ``k`` up to at least ``k_max``."""
    return _tau_table_block(N, _K_BLOCK * -(-k_max // _K_BLOCK))


@lru_cache(maxsize=256)
def _tails_block(N: int, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    table = _tau_table_block(N, k_max)
    # cumulative sums can overshoot 1 by an ulp where the tail is certain
    upper = np.minimum(np.cumsum(table[:, ::-1], axis=1)[:, ::-1], 1.0)
    lower = np.minimum(np.cumsum(table, axis=1), 1.0)
    return upper, lower


def _tails(N: int, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """``P(tau_k >= n)`` and ``P(tau_k <= n)`` as arrays over ``(k, n)``."""
    return _tails_block(N, _K_BLOCK * -(-k_max // _K_BLOCK))


def _log_plus(x: float) -> float:
    return math.log(x) if x > 1.0 else 0.0


def sharp_local_rhs(N: int, k: int, n: int, C: float, c: float) -> float:
    """``C k P(T=n) P(T<=n)^(k-1) exp(-(c k/(ln n + 1)) log+(c k/(ln n + 1)))``."""
    law = law_from_harmonic(N)
    a = c * k / (math.log(n) + 1.0)
    return C * k * law.prob(n) * law.cdf(n) ** (k - 1) * math.exp(-a * _log_plus(a))


def bound_sharp_local(N: int, k: int, n: int, C: float, c: float) -> BoundCheck:
    """Local estimate for ``P(tau_k = n)`` under the harmonic law with cutoff ``N``.

    Parameters
    ----------
    N : int
        Cutoff of the harmonic law.
    k : int
        Number of steps, ``k >= 1``.
    n : int
        Target, ``1 <= n <= N``.
    C, c : float
        Constants of the estimate.
    """
    if not 1 <= n <= N:
        raise DomainError("need 1 <= n <= N")
    if k < 1:
        raise DomainError("need k >= 1")
    lhs = float(_tau_table(N, max(k, 1))[k, n]) if n <= k * N else 0.0
    return BoundCheck(lhs=lhs, rhs=sharp_local_rhs(N, k, n, C, c))


def fuk_nagaev_rhs(m: int, k: int, n: int, C: float) -> float:
    """``(C k m / (n (ln m + 1)) min 1)^(n/m)``."""
    x = min(C * k * m / (n * (math.log(m) + 1.0)), 1.0)
    return x ** (n / m)


def bound_fuk_nagaev(m: int, k: int, n: int, C: float) -> BoundCheck:
    """Upper tail ``P(tau_k >= n)`` for the harmonic law with cutoff ``m``."""
    if m < 1 or k < 0 or n < 1:
        raise DomainError("need m >= 1, k >= 0, n >= 1")
    upper, _ = _tails(m, max(k, 1))
    lhs = float(upper[k, n]) if n <= k * m else 0.0
    return BoundCheck(lhs=lhs, rhs=fuk_nagaev_rhs(m, k, n, C))


def lower_tail_rhs(m: int, k: int, n: int, c: float) -> float:
    """``(n (ln m + 1)/(c k m) min 1)^(c k/(ln m + 1))``."""
    lm = math.log(m) + 1.0
    x = min(n * lm / (c * k * m), 1.0)
    return x ** (c * k / lm)


def bound_lower_tail(m: int, k: int, n: int, c: float) -> BoundCheck:
    """Lower tail ``P(tau_k <= n)`` for the harmonic law with cutoff ``m``."""
    if m < 1 or k < 1 or n < 0:
        raise DomainError("need m >= 1, k >= 1, n >= 0")
    _, lower = _tails(m, k)
    lhs = float(lower[k, min(n, k * m)])
    return BoundCheck(lhs=lhs, rhs=lower_tail_rhs(m, k, n, c))


# ---------------------------------------------------------------------------
# sweeps


def sweep_sharp_local(Ns=(64,), k_max: int = 64, n_max: int = 64, c: float = 0.05) -> float:
    """Smallest ``C`` for which the local estimate holds on the whole range."""
    best = 0.0
    for N in Ns:
        table = _tau_table(N, k_max)
        for k in range(1, k_max + 1):
            for n in range(1, min(n_max, N) + 1):
                lhs = table[k, n]
                if lhs > 0.0:
                    best = max(best, lhs / sharp_local_rhs(N, k, n, 1.0, c))
    return best


def sweep_fuk_nagaev(ms=range(1, 65), k_max: int = 64, n_max: int = 64) -> float:
    """Smallest ``C`` for which the upper-tail bound holds on the whole range."""
    best = 0.0
    for m in ms:
        upper, _ = _tails(m, k_max)
        lm = math.log(m) + 1.0
        for k in range(1, k_max + 1):
            for n in range(1, min(n_max, k * m) + 1):
                lhs = upper[k, n]
                if lhs <= 0.0:
                    continue
                x = k * m / (n * lm)
                # rhs(C) = (C x min 1)^(n/m) >= lhs iff C >= lhs^(m/n) / x
                best = max(best, lhs ** (m / n) / x)
    return best


def max_lower_tail_c(m: int, k: int, n: int) -> float:
    """Largest ``c`` with ``P(tau_k <= n) <= rhs(c)``; ``inf`` when the tail vanishes.

    With ``y = n (ln m + 1)/(k m)`` and ``a = k/(ln m + 1)`` the right side is
    ``1`` for ``c <= y`` and ``(y/c)^(a c)`` beyond, which decreases in ``c``.
    Equality ``a c ln(c/y) = ln(1/lhs)`` is solved by the principal branch
    of the Lambert function: ``c = (ln(1/lhs)/a) / W(ln(1/lhs)/(a y))``.
    """
    _, lower = _tails(m, k)
    lhs = float(lower[k, min(n, k * m)])
    return _max_c(lhs, m, k, n)


def _max_c(lhs: float, m: int, k: int, n: int) -> float:
    if lhs <= 0.0:
        return math.inf
    lm = math.log(m) + 1.0
    y = n * lm / (k * m)
    if lhs >= 1.0:
        return y
    target = -math.log(lhs) / (k / lm)
    if y == 0.0:
        return math.inf
    return float(target / lambertw(target / y).real)


def sweep_lower_tail(ms=range(1, 65), k_max: int = 64, n_max: int = 64) -> float:
    """Largest ``c`` for which the lower-tail bound holds on the whole range."""
    best = math.inf
    for m in ms:
        _, lower = _tails(m, k_max)
        for k in range(1, k_max + 1):
            for n in range(0, n_max + 1):
                best = min(best, _max_c(float(lower[k, min(n, k * m)]), m, k, n))
    return best
