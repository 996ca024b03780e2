"""Triangular-array inter-arrival laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class InterArrivalLaw:
    """Law ``P(T = n) = r(n) / R_N`` on ``{1, ..., N}``.

    Attributes
    ----------
    N : int
        Cutoff.
    r : ndarray
        Weights ``r(1), ..., r(N)``, all positive (read-only).
    R_N : float
        ``sum r(n)``, correctly rounded.
    name : str
        Label used in reports.
    """

    N: int
    r: np.ndarray = field(repr=False)
    R_N: float
    name: str = "custom"

    @classmethod
    def from_weights(cls, r, name: str = "custom") -> "InterArrivalLaw":
        r = np.array(r, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise DomainError("weights must be a non-empty 1-d sequence")
        if np.any(~(r > 0.0)) or not np.all(np.isfinite(r)):
            raise DomainError("weights must be finite and positive")
        r.flags.writeable = False
        return cls(N=int(r.size), r=r, R_N=math.fsum(r), name=name)

    @property
    def pmf(self) -> np.ndarray:
        """``P(T = n)`` for ``n = 0..N`` (entry 0 is zero)."""
        out = np.zeros(self.N + 1)
        out[1:] = self.r / self.R_N
        return out

    def prob(self, n: int) -> float:
        return float(self.r[n - 1] / self.R_N) if 1 <= n <= self.N else 0.0

    def cdf(self, n: int) -> float:
        """``P(T <= n)``."""
        if n < 1:
            return 0.0
        if n >= self.N:
            return 1.0
        return math.fsum(self.r[:n]) / self.R_N


def law_from_harmonic(N: int) -> InterArrivalLaw:
    """Harmonic law ``P(T = n) = (1/n) / R_N`` for ``1 <= n <= N``.

    Examples
    --------
    >>> law = law_from_harmonic(2)
    >>> round(law.prob(1), 15), round(law.prob(2), 15)
    (0.666666666666667, 0.333333333333333)
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"N must be at least 1, got {N}")
    return InterArrivalLaw.from_weights(1.0 / np.arange(1, N + 1), name="harmonic")


def lambda_for_theta(N: int, theta: float) -> float:
    """Critical weight ``1 + theta / ln N``."""
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    return 1.0 + float(theta) / math.log(N)
