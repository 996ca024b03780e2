"""Goodness-of-fit statistics with tabulated critical values.

The critical values are external constants copied from standard tables:
the upper quantiles of the Kolmogorov distribution (the large-sample law of
``sqrt(n) D_n``) and of the chi-square distribution at four decimals.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import DomainError

# upper alpha-quantiles of the Kolmogorov distribution
KOLMOGOROV_QUANTILES = {
    0.10: 1.2238478702170823,
    0.05: 1.3580986393225507,
    0.01: 1.6276236115189504,
    0.001: 1.9494746035043753,
}

# upper alpha-quantiles of chi-square with df = 1..30
CHI2_QUANTILES = {
    0.05: (
        3.8415, 5.9915, 7.8147, 9.4877, 11.0705, 12.5916, 14.0671, 15.5073, 16.919, 18.307,
        19.6751, 21.0261, 22.362, 23.6848, 24.9958, 26.2962, 27.5871, 28.8693, 30.1435, 31.4104,
        32.6706, 33.9244, 35.1725, 36.415, 37.6525, 38.8851, 40.1133, 41.3371, 42.557, 43.773,
    ),
    0.01: (
        6.6349, 9.2103, 11.3449, 13.2767, 15.0863, 16.8119, 18.4753, 20.0902, 21.666, 23.2093,
        24.725, 26.217, 27.6882, 29.1412, 30.5779, 31.9999, 33.4087, 34.8053, 36.1909, 37.5662,
        38.9322, 40.2894, 41.6384, 42.9798, 44.3141, 45.6417, 46.9629, 48.2782, 49.5879, 50.8922,
    ),
}


def _alpha(table: dict, alpha: float):
    try:
        return table[alpha]
    except KeyError:
        raise DomainError(f"alpha must be one of {sorted(table)}") from None


def ks_statistic(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-sample Kolmogorov-Smirnov distance ``sup |F_n - F|``.

    Parameters
    ----------
    sample : array_like
    cdf : callable
        Vectorized continuous distribution function.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_two_sample(x, y) -> float:
    """Two-sample distance ``sup |F_x - F_y|`` over all sample points."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise DomainError("empty sample")
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / x.size
    fy = np.searchsorted(y, pts, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Large-sample critical distance for ``n`` observations."""
    return _alpha(KOLMOGOROV_QUANTILES, alpha) / math.sqrt(n)


def ks_two_sample_critical(n: int, m: int, alpha: float = 0.01) -> float:
    return _alpha(KOLMOGOROV_QUANTILES, alpha) * math.sqrt((n + m) / (n * m))


def chi_square(observed, expected) -> float:
    """Pearson statistic ``sum (O - E)^2 / E``."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.shape != e.shape or np.any(e <= 0.0):
        raise DomainError("expected counts must be positive and match observed")
    return float(np.sum((o - e) ** 2 / e))


def chi2_critical(df: int, alpha: float = 0.01) -> float:
    table = _alpha(CHI2_QUANTILES, alpha)
    if not 1 <= df <= len(table):
        raise DomainError(f"df must lie in 1..{len(table)}")
    return table[df - 1]


def proportion_z(count: int, n: int, p: float) -> float:
    """Standardized deviation of ``count/n`` from ``p``."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    return (count / n - p) / math.sqrt(p * (1.0 - p) / n)


def mean_z(sample, mean: float) -> float:
    """``(mean(sample) - mean) / standard error``."""
    x = np.asarray(sample, dtype=float)
    return (float(np.mean(x)) - mean) / (float(np.std(x, ddof=1)) / math.sqrt(x.size))
