"""Dickman function and Dickman subordinator density.

The density of the Dickman subordinator at time ``s`` is

    f_s(t) = s t^(s-1) c_s,                              0 < t <= 1,
    f_s(t) = s t^(s-1) [c_s - int_0^(t-1) f_s(a) (1+a)^(-s) da],   t > 1,

with ``c_s = exp(-gamma s) / Gamma(s + 1)``. Writing ``f_s = s t^(s-1) Q``,
the bracket ``Q`` satisfies ``Q'(t) = -f_s(t - 1) t^(-s)`` and is marched
one unit interval at a time as a running difference, which keeps its
relative accuracy where it is tiny.

Exactness by unit interval:

* ``(0, 1]``: closed form.
* ``(1, 2]``: ``Q(1 + x) = c_s (1 - s x^s Psi(x))`` with
  ``Psi(x) = int_0^1 y^(s-1) (1 + x y)^(-s) dy``, a Gauss-Jacobi rule
  absorbing the ``y^(s-1)`` factor. This is the substitution ``a = b^(1/s)``
  in quadrature form.
* ``(2, 3]``: decrements from Gauss-Legendre on each grid cell using the
  exact density on ``(1, 2]``. The ``x^s`` cusp at ``t = 1`` is split off on
  the first cell.
* beyond 3: three-point cell rule on the tabulated values.

The Dickman function ``rho`` solves ``t rho'(t) + rho(t - 1) = 0`` with
``rho = 1`` on ``(0, 1]``. It is integrated in the same panel fashion,
independently of the density tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, GridRangeError
from .special import (
    EULER_GAMMA,
    cell_integrals,
    gauss_jacobi_power,
    gauss_legendre,
    log_gamma,
)

DEFAULT_H = 2.0**-12
DEFAULT_T_MAX = 16.0

_JACOBI_NODES = 24
_CELL_NODES = 8


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be a finite positive number, got {value!r}")
    return value


def _check_step(h: float) -> int:
    """Return ``1/h`` after checking it is an integer of at least 4."""
    h = _check_positive("h", h)
    m = round(1.0 / h)
    if m < 4 or abs(m * h - 1.0) > 1e-12:
        raise DomainError(f"h must be 1/M for an integer M >= 4, got {h!r}")
    return m


def small_time_constant(s: float) -> float:
    """``P(Y_s <= 1) = exp(-gamma s) / Gamma(s + 1)``."""
    return math.exp(-EULER_GAMMA * s - log_gamma(s + 1.0))


# ---------------------------------------------------------------------------
# exact pieces


def _psi(s: float, x) -> np.ndarray:
    y, w = gauss_jacobi_power(_JACOBI_NODES, s - 1.0)
    x = np.asarray(x, dtype=float)
    return (1.0 + x[..., None] * y) ** (-s) @ w


def _bracket_unit1(s: float, x) -> np.ndarray:
    """``Q(1 + x)`` for ``x`` in ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    return small_time_constant(s) * (1.0 - s * x**s * _psi(s, x))


def _density_unit1(s: float, x) -> np.ndarray:
    """``f_s(1 + x)`` for ``x`` in ``[0, 1]``."""
    x = np.asarray(x, dtype=float)
    return s * (1.0 + x) ** (s - 1.0) * _bracket_unit1(s, x)


def _decrement_unit2(s: float, lo, hi) -> np.ndarray:
    """``int_lo^hi f_s(1 + x) (2 + x)^(-s) dx`` for ``0 <= lo <= hi <= 1``.

    Panels starting at ``x = 0`` carry the ``x^s`` cusp and are split into a
    smooth part and an ``x^s``-weighted part.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    out = np.empty(np.broadcast(lo, hi).shape)
    lo, hi = np.broadcast_arrays(lo, hi)
    xg, wg = gauss_legendre(_CELL_NODES)
    cs = small_time_constant(s)

    def smooth_factor(x):
        return s * (1.0 + x) ** (s - 1.0) * (2.0 + x) ** (-s)

    cusp = lo == 0.0
    reg = ~cusp
    if np.any(reg):
        a, b = lo[reg], hi[reg]
        x = a[:, None] + (b - a)[:, None] * xg
        vals = _density_unit1(s, x) * (2.0 + x) ** (-s)
        out[reg] = (vals @ wg) * (b - a)
    if np.any(cusp):
        b = hi[cusp]
        x = b[:, None] * xg
        smooth = (smooth_factor(x) @ wg) * b
        yj, wj = gauss_jacobi_power(_CELL_NODES, s)
        xj = b[:, None] * yj
        weighted = ((smooth_factor(xj) * _psi(s, xj)) @ wj) * b ** (1.0 + s)
        out[cusp] = cs * (smooth - s * weighted)
    return out


# ---------------------------------------------------------------------------
# density grid


@dataclass(frozen=True)
class DensityGrid:
    """Tabulated Dickman subordinator density for one time ``s``.

    Attributes
    ----------
    s : float
        Subordinator time.
    h : float
        Grid step, ``1/M`` for an integer ``M``.
    t_max : float
        Last grid point, an integer.
    t : ndarray
        Grid ``h, 2h, ..., t_max`` (read-only).
    values : ndarray
        ``f_s`` on ``t`` (read-only).
    bracket : ndarray
        ``Q = f_s / (s t^(s-1))`` on ``t`` (read-only).
    cdf : ndarray
        ``P(Y_s <= t)`` on ``t`` (read-only).
    """

    s: float
    h: float
    t_max: float
    t: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    bracket: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)

    @property
    def per_unit(self) -> int:
        return round(1.0 / self.h)

    def trapezoid_mass(self) -> float:
        """Grid mass over ``(0, t_max]``.

        The first unit uses the exact ``P(Y_s <= 1)`` since ``f_s`` is
        unbounded at 0 for ``s < 1``; the rest is the trapezoid rule.
        """
        m = self.per_unit
        tail = self.values[m - 1:]
        return small_time_constant(self.s) + self.h * (
            math.fsum(tail) - 0.5 * (tail[0] + tail[-1])
        )

    def index_range(self, t: float) -> int:
        """Index ``k`` with ``t_k <= t < t_{k+1}``, checking bounds."""
        if t > self.t_max * (1.0 + 1e-15):
            raise GridRangeError(
                f"t={t!r} lies beyond the tabulated range (0, {self.t_max}]"
            )
        return min(int(math.floor(t / self.h + 1e-9)), len(self.t)) - 1


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@lru_cache(maxsize=32)
def _build_density_grid(s: float, h: float, units: int) -> DensityGrid:
    m = round(1.0 / h)
    n = units * m
    t = np.arange(1, n + 1) * h
    cs = small_time_constant(s)
    q = np.empty(n)
    cell = np.empty(n)  # int of f_s over ((i-1)h, ih]

    q[:m] = cs
    cell_edges = np.arange(m + 1) * h
    cell[:m] = cs * (cell_edges[1:] ** s - cell_edges[:-1] ** s)

    if units >= 2:
        x = np.arange(1, m + 1) * h
        q[m:2 * m] = _bracket_unit1(s, x)
        # Cell masses on (1, 2] by Gauss rules on the exact density.
        lo = np.arange(m) * h
        hi = lo + h
        xg, wg = gauss_legendre(_CELL_NODES)
        reg_x = lo[1:, None] + h * xg
        cell[m + 1:2 * m] = (_density_unit1(s, reg_x) @ wg) * h
        cell[m] = cdf_F_unit1_exact(s, h)
    if units >= 3:
        dec = _decrement_unit2(s, lo, hi)
        q[2 * m:3 * m] = q[2 * m - 1] - np.cumsum(dec)
    for k in range(3, units):
        # Panel (k, k+1]: g(u) = f_s(u - 1) u^(-s), f_s(u - 1) on [k-1, k].
        f_prev = np.empty(m + 1)
        f_prev[0] = s * (k - 1.0) ** (s - 1.0) * q[(k - 1) * m - 1]
        f_prev[1:] = s * t[(k - 1) * m:k * m] ** (s - 1.0) * q[(k - 1) * m:k * m]
        u = k + np.arange(m + 1) * h
        g = f_prev * u ** (-s)
        q[k * m:(k + 1) * m] = q[k * m - 1] - np.cumsum(cell_integrals(g, h))
    np.maximum(q, 0.0, out=q)

    values = s * t ** (s - 1.0) * q
    for k in range(2, units):
        f_panel = np.empty(m + 1)
        f_panel[0] = values[k * m - 1]
        f_panel[1:] = values[k * m:(k + 1) * m]
        cell[k * m:(k + 1) * m] = cell_integrals(f_panel, h)
    cdf = np.empty(n)
    cdf[:m] = cs * t[:m] ** s
    if units >= 2:
        cdf[m - 1:] = cs + np.concatenate([[0.0], np.cumsum(cell[m:])])
    return DensityGrid(
        s=s,
        h=h,
        t_max=float(units),
        t=_freeze(t),
        values=_freeze(values),
        bracket=_freeze(q),
        cdf=_freeze(np.minimum(cdf, 1.0)),
    )


def build_density_grid(s: float, h: float = DEFAULT_H, t_max: float = DEFAULT_T_MAX) -> DensityGrid:
    """Tabulate ``f_s`` on ``h, 2h, ..., ceil(t_max)``.

    Parameters
    ----------
    s : float
        Subordinator time, ``s > 0``.
    h : float, optional
        Grid step, ``1/M`` with ``M >= 4`` an integer. Default ``2**-12``.
    t_max : float, optional
        Upper end, rounded up to an integer. Default 16.

    Returns
    -------
    DensityGrid
        Immutable and cached per ``(s, h, t_max)``.
    """
    s = _check_positive("s", s)
    _check_step(h)
    t_max = _check_positive("t_max", t_max)
    return _build_density_grid(s, float(h), max(1, int(math.ceil(t_max - 1e-12))))


def _interp_panel(t: float, grid_t: np.ndarray, vals: np.ndarray, h: float, k: int) -> float:
    """Cubic Lagrange interpolation with the stencil kept inside one unit panel."""
    m = round(1.0 / h)
    panel = min(int(math.floor(t - 1e-12)), len(grid_t) // m - 1)
    first = panel * m - 1  # index of the panel's left end
    last = (panel + 1) * m - 1
    j0 = min(max(k - 1, first), last - 3)
    xs = grid_t[j0:j0 + 4]
    ys = vals[j0:j0 + 4]
    total = 0.0
    for i in range(4):
        li = 1.0
        for j in range(4):
            if j != i:
                li *= (t - xs[j]) / (xs[i] - xs[j])
        total += li * ys[i]
    return total


def density_f(s: float, t: float, h: float = DEFAULT_H, t_max: float = DEFAULT_T_MAX) -> float:
    """Density of the Dickman subordinator at time ``s``.

    Parameters
    ----------
    s, t : float
        Positive time and position.
    h, t_max : float, optional
        Grid used for ``t > 3``.

    Returns
    -------
    float

    Raises
    ------
    DomainError
        For non-positive arguments.
    GridRangeError
        For ``t`` beyond the tabulated range.

    Examples
    --------
    >>> round(density_f(1.0, 0.5), 10)
    0.5614594836
    """
    s = _check_positive("s", s)
    t = _check_positive("t", t)
    if t <= 1.0:
        return s * t ** (s - 1.0) * small_time_constant(s)
    if t > t_max:
        raise GridRangeError(f"t={t!r} lies beyond t_max={t_max!r}")
    if t <= 2.0:
        return float(_density_unit1(s, t - 1.0))
    grid = build_density_grid(s, h, t_max)
    m = grid.per_unit
    if t <= 3.0:
        j = int(math.floor((t - 2.0) * m))
        q = grid.bracket[2 * m - 1 + j]
        if t - 2.0 > j * h:
            q -= float(_decrement_unit2(s, j * h, t - 2.0)[0])
        return s * t ** (s - 1.0) * max(q, 0.0)
    k = grid.index_range(t)
    q = _interp_panel(t, grid.t, grid.bracket, h, k)
    return s * t ** (s - 1.0) * max(q, 0.0)


def cdf_F(s: float, t: float, h: float = DEFAULT_H, t_max: float = DEFAULT_T_MAX) -> float:
    """Distribution function ``P(Y_s <= t)``.

    ``t^s P(Y_s <= 1)`` on ``(0, 1]``; beyond, the grid integral of ``f_s``
    added to ``P(Y_s <= 1)``.
    """
    s = _check_positive("s", s)
    t = _check_positive("t", t)
    if t <= 1.0:
        return t**s * small_time_constant(s)
    if t > t_max:
        raise GridRangeError(f"t={t!r} lies beyond t_max={t_max!r}")
    grid = build_density_grid(s, h, t_max)
    k = grid.index_range(t)
    base = grid.cdf[k]
    t0 = grid.t[k]
    if t > t0:
        if t <= 2.0:
            lo = (k + 1) * h - 1.0
            xg, wg = gauss_legendre(_CELL_NODES)
            if k + 1 == grid.per_unit:
                extra = cdf_F_unit1_exact(s, t - 1.0)
            else:
                x = lo + (t - 1.0 - lo) * xg
                extra = float(_density_unit1(s, x) @ wg) * (t - 1.0 - lo)
        else:
            xg, wg = gauss_legendre(4)
            pts = t0 + (t - t0) * xg
            extra = (t - t0) * sum(
                w * p_val
                for w, p_val in zip(
                    wg,
                    (s * p ** (s - 1.0) * _interp_panel(p, grid.t, grid.bracket, h, k) for p in pts),
                )
            )
        base = base + extra
    return min(float(base), 1.0)


def cdf_F_unit1_exact(s: float, x: float) -> float:
    """``int_1^(1+x) f_s`` for small ``x``, splitting off the ``x^s`` cusp."""
    cs = small_time_constant(s)
    xg, wg = gauss_legendre(_CELL_NODES)
    smooth = float((s * (1.0 + x * xg) ** (s - 1.0)) @ wg) * x
    yj, wj = gauss_jacobi_power(_CELL_NODES, s)
    weighted = float(
        (s * (1.0 + x * yj) ** (s - 1.0) * _psi(s, x * yj)) @ wj
    ) * x ** (1.0 + s)
    return cs * (smooth - s * weighted)


def chernoff_tail(s: float, t: float) -> float:
    """Upper bound on ``P(Y_s > t)`` from the Laplace transform.

    Uses ``E exp(l Y_s) = exp(s Ein(l))`` with
    ``Ein(l) = int_0^l (e^u - 1)/u du`` and minimizes over ``l >= 0``.
    """
    s = _check_positive("s", s)
    t = _check_positive("t", t)
    if t <= s:
        return 1.0

    def ein(lam: float) -> float:
        term, total, k = lam, 0.0, 1
        while True:
            total += term / k
            k += 1
            term *= lam / k
            if term / k < 1e-17 * total:
                return total + term / k

    # Stationary point: (e^l - 1)/l = t/s, found by bisection.
    lo, hi = 0.0, 1.0
    while math.expm1(hi) / hi < t / s:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.expm1(mid) / mid < t / s:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return min(1.0, math.exp(-lam * t + s * ein(lam)))


# ---------------------------------------------------------------------------
# Dickman function


@lru_cache(maxsize=16)
def _rho_table(h: float, units: int) -> np.ndarray:
    m = round(1.0 / h)
    rho = np.empty(units * m + 1)  # rho at 0, h, ..., units
    rho[: m + 1] = 1.0
    if units >= 2:
        t = 1.0 + np.arange(1, m + 1) * h
        rho[m + 1:2 * m + 1] = 1.0 - np.log(t)
    for k in range(2, units):
        u = k + np.arange(m + 1) * h
        g = rho[(k - 1) * m:k * m + 1] / u
        rho[k * m + 1:(k + 1) * m + 1] = rho[k * m] - np.cumsum(cell_integrals(g, h))
    return _freeze(rho)


def dickman_rho(t: float, h: float = DEFAULT_H) -> float:
    """Dickman function ``rho(t)``.

    Parameters
    ----------
    t : float
        Positive argument.
    h : float, optional
        Step of the panel integration, ``1/M`` with ``h <= 2**-8``.

    Returns
    -------
    float
        ``1`` on ``(0, 1]``, ``1 - ln t`` on ``(1, 2]``, and the panel
        solution of ``t rho'(t) + rho(t - 1) = 0`` beyond.

    Examples
    --------
    >>> dickman_rho(0.5)
    1.0
    >>> abs(dickman_rho(2.0) - (1 - math.log(2))) < 1e-15
    True
    """
    t = _check_positive("t", t)
    if h > 2.0**-8:
        raise DomainError(f"h must be at most 2**-8, got {h!r}")
    m = _check_step(h)
    if t <= 1.0:
        return 1.0
    if t <= 2.0:
        return 1.0 - math.log(t)
    units = int(math.ceil(t - 1e-12))
    rho = _rho_table(float(h), units)
    k = int(math.floor(t * m + 1e-9))
    if abs(t - k * h) < 1e-12 * t:
        return float(rho[k])
    panel = int(math.floor(t))
    j0 = min(max(k - 1, panel * m), (panel + 1) * m - 3)
    xs = np.arange(j0, j0 + 4) * h
    ys = rho[j0:j0 + 4]
    total = 0.0
    for i in range(4):
        li = 1.0
        for j in range(4):
            if j != i:
                li *= (t - xs[j]) / (xs[i] - xs[j])
        total += li * ys[i]
    return float(total)


def rho_grid(t_max: float, h: float = DEFAULT_H) -> tuple[np.ndarray, np.ndarray]:
    """Dickman function on ``0, h, ..., ceil(t_max)`` as ``(t, rho)``."""
    m = _check_step(h)
    units = max(1, int(math.ceil(_check_positive("t_max", t_max) - 1e-12)))
    rho = _rho_table(float(h), units)
    return np.arange(units * m + 1) * h, rho
