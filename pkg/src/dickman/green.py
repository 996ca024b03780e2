"""Continuum Green functions of the Dickman subordinator.

For ``0 < t <= 1``

    G_theta(t)    = int_0^inf e^((theta - gamma) s) s t^(s-1) / Gamma(s+1) ds,
    Gbar_theta(u) = int_0^u G_theta = int_0^inf e^((theta - gamma) s) u^s / Gamma(s+1) ds.

For ``t`` in ``(T, T+1]`` with an integer ``T >= 1`` the straddle
decomposition at ``T`` gives, with ``tau = t - T``,

    G(t) = int_0^tau G(tau - b) H_T(b) db,
    H_T(b) = int_0^(1-b) G(T - w) / (w + b) dw,

which only needs ``G`` on ``(0, 1]`` and on ``(T-1, T]``. ``G`` has a weak
cusp at every integer, ``G(T + d) - G(T) ~ 1/log(1/d)``, so each interval
is tabulated in the variable ``z = -log(t - T)``.
"""

from __future__ import annotations

import math
import threading
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from .errors import DomainError
from .special import EULER_GAMMA, adaptive_simpson, gauss_legendre, log_gamma

EXTENSION_STEP = 2.0**-10
_SMALL_Z_MAX = 130.0  # G on (0, 1] is splined for t >= exp(-130)
_SMALL_Z_STEP = 0.02
_CUSP_Z_MAX = 60.0  # interval tables cover t - T >= exp(-60)
_CUSP_Z_STEP = 0.05
_CUSP_Z_FINE = 3.0  # finer nodes towards the right end, where G' has a log singularity
_CUSP_Z_FINE_STEP = 0.002
_H_Z_MIN = -110.0
_H_Z_STEP = 0.05
_H_Z_FINE = -3.0  # finer nodes on [-3, 0], where H bends towards H(1) = 0
_H_Z_FINE_STEP = 0.002
_PANEL_NODES = 16
_S_PANELS = 40
_S_SCAN = np.concatenate([[0.0], np.geomspace(1e-6, 4000.0, 500)])


def _log_integrand_G(s, theta: float, t: float):
    # log of e^((theta-gamma)s) s t^(s-1) / Gamma(s+1)
    return np.log(s) + (theta - EULER_GAMMA) * s + (s - 1.0) * math.log(t) - gammaln(s + 1.0)


def _log_integrand_bar(s, theta: float, u: float):
    return (theta - EULER_GAMMA) * s + s * math.log(u) - gammaln(s + 1.0)


def _cutoff(logf, theta: float, x: float, drop: float = 46.0) -> float:
    """Smallest scan point past the peak where the log-integrand fell by ``drop``."""
    with np.errstate(divide="ignore"):
        vals = logf(_S_SCAN, theta, x)
    peak = int(np.argmax(vals))
    below = np.nonzero(vals[peak:] < vals[peak] - drop)[0]
    if below.size == 0:
        raise DomainError("integrand does not decay on the scanned range")
    return float(_S_SCAN[peak + below[0]])


def _s_quadrature(t, theta: float, kind: str) -> np.ndarray:
    """Vectorized Gauss-Legendre version of the two s-integrals."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    big_l = -np.log(t)
    a = (theta - EULER_GAMMA - big_l)[:, None]
    with np.errstate(divide="ignore"):
        ex = a * _S_SCAN - gammaln(_S_SCAN + 1.0)
    if kind == "G":
        with np.errstate(divide="ignore"):
            ex = ex + np.log(_S_SCAN)
    pk = ex.max(axis=1, keepdims=True)
    keep = ex > pk - 46.0
    last = keep.shape[1] - 1 - np.argmax(keep[:, ::-1], axis=1)
    smax = _S_SCAN[np.minimum(last + 1, len(_S_SCAN) - 1)]
    xg, wg = gauss_legendre(_PANEL_NODES)
    edges = np.linspace(0.0, 1.0, _S_PANELS + 1)
    nodes = (edges[:-1, None] + (1.0 / _S_PANELS) * xg).ravel()
    weights = np.tile(wg / _S_PANELS, _S_PANELS)
    s = smax[:, None] * nodes
    if kind == "G":
        f = s * np.exp(a * s - gammaln(s + 1.0) + big_l[:, None])
    else:
        f = np.exp(a * s - gammaln(s + 1.0))
    return (f @ weights) * smax


def heat_kernel(c: float, t: float, x) -> float:
    """Gaussian kernel ``g_{ct}(x) = (2 pi c t)^(-d/2) exp(-|x|^2 / (2 c t))``.

    Parameters
    ----------
    c : float
        Variance per unit time, positive.
    t : float
        Time, positive.
    x : float or sequence of float
        Point in ``R^d``; a scalar means ``d = 1``.
    """
    c, t = float(c), float(t)
    if not c > 0.0:
        raise DomainError(f"c must be positive, got {c!r}")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    var = c * t
    return float((2.0 * math.pi * var) ** (-x.size / 2.0) * math.exp(-float(x @ x) / (2.0 * var)))


class GreenEvaluator:
    """``G_theta`` on ``(0, inf)`` and ``Gbar_theta`` on ``(0, 1]`` for one ``theta``.

    Parameters
    ----------
    theta : float
        Exponential weight.
    quad_tol : float, optional
        Relative tolerance of the adaptive quadrature on ``(0, 1]``.

    Notes
    -----
    Interval tables for ``t > 1`` are built lazily under a lock and never
    modified afterwards. Point values of ``green_extend`` on the
    ``2**-10`` grid are memoized in a write-once table; two threads filling
    the same cell compute the same number, so the race is harmless.
    """

    def __init__(self, theta: float, quad_tol: float = 1e-10):
        self.theta = float(theta)
        self.quad_tol = float(quad_tol)
        self._lock = threading.Lock()
        self._small: CubicSpline | None = None
        self._intervals: dict[int, CubicSpline] = {}
        self._h_tables: dict[int, CubicSpline] = {}
        self.extension_cache: dict[tuple[int, int], float] = {}

    # -- (0, 1] -------------------------------------------------------------

    def s_max(self, t: float) -> float:
        """Quadrature cutoff in ``s`` for ``G_theta(t)``."""
        return _cutoff(_log_integrand_G, self.theta, t)

    def G(self, t: float) -> float:
        """Adaptive Simpson evaluation of ``G_theta(t)``, ``0 < t <= 1``."""
        t = float(t)
        if not 0.0 < t <= 1.0:
            raise DomainError(f"G on (0, 1] needs 0 < t <= 1, got {t!r}")
        theta = self.theta
        lt = math.log(t)

        def integrand(s: float) -> float:
            if s == 0.0:
                return 0.0
            return s * math.exp((theta - EULER_GAMMA) * s + (s - 1.0) * lt - log_gamma(s + 1.0))

        smax = self.s_max(t)
        while True:
            # Split at the peak so the adaptive rule sees the bump.
            peak = 1.0 / max(EULER_GAMMA - theta - lt, 1e-3)
            cut = min(peak, 0.5 * smax)
            value = adaptive_simpson(integrand, 0.0, cut, rtol=self.quad_tol * 0.1) + adaptive_simpson(
                integrand, cut, smax, rtol=self.quad_tol * 0.1
            )
            if integrand(smax) <= 1e-16 * value:
                return value
            smax *= 2.0

    def G_array(self, t) -> np.ndarray:
        """Vectorized ``G_theta`` on ``(0, 1]`` by composite Gauss rules."""
        t = np.asarray(t, dtype=float)
        if np.any(~((t > 0.0) & (t <= 1.0))):
            raise DomainError("G_array needs 0 < t <= 1")
        return _s_quadrature(t.ravel(), self.theta, "G").reshape(t.shape)

    def G_bar(self, u: float) -> float:
        """``Gbar_theta(u)`` for ``0 < u <= 1`` by adaptive Simpson."""
        u = float(u)
        if not 0.0 < u <= 1.0:
            raise DomainError(f"Gbar needs 0 < u <= 1, got {u!r}")
        theta = self.theta
        lu = math.log(u)

        def integrand(s: float) -> float:
            return math.exp((theta - EULER_GAMMA) * s + s * lu - log_gamma(s + 1.0))

        smax = _cutoff(_log_integrand_bar, theta, u)
        while True:
            value = adaptive_simpson(integrand, 0.0, smax, rtol=self.quad_tol * 0.1)
            if integrand(smax) <= 1e-16 * value:
                return value
            smax *= 2.0

    def G_bar_array(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if np.any(~((u > 0.0) & (u <= 1.0))):
            raise DomainError("G_bar_array needs 0 < u <= 1")
        return _s_quadrature(u.ravel(), self.theta, "bar").reshape(u.shape)

    # -- tables ---------------------------------------------------------------

    def _small_spline(self) -> CubicSpline:
        if self._small is None:
            with self._lock:
                if self._small is None:
                    z = np.arange(0.0, _SMALL_Z_MAX + _SMALL_Z_STEP / 2, _SMALL_Z_STEP)
                    self._small = CubicSpline(z, np.log(_s_quadrature(np.exp(-z), self.theta, "G")))
        return self._small

    def _g_unit(self, t: np.ndarray) -> np.ndarray:
        """``G`` on ``(0, 1]`` from the log spline, exact quadrature below its range."""
        t = np.asarray(t, dtype=float)
        z = -np.log(t)
        out = np.empty_like(t)
        inside = z <= _SMALL_Z_MAX
        out[inside] = np.exp(self._small_spline()(z[inside]))
        if np.any(~inside):
            out[~inside] = _s_quadrature(t[~inside], self.theta, "G")
        return out

    def _g_left(self, big_t: int, delta: np.ndarray) -> np.ndarray:
        """``G(big_t - 1 + delta)`` for ``delta`` in ``(0, 1]``."""
        if big_t == 1:
            return self._g_unit(delta)
        spline = self._interval_spline(big_t - 1)
        z = np.minimum(-np.log(delta), _CUSP_Z_MAX)
        return spline(z)

    def _h_spline(self, big_t: int) -> CubicSpline:
        if big_t not in self._h_tables:
            zb = np.concatenate(
                [
                    np.arange(_H_Z_MIN, _H_Z_FINE, _H_Z_STEP),
                    np.arange(_H_Z_FINE, -_H_Z_FINE_STEP / 2, _H_Z_FINE_STEP),
                ]
            )
            values = self._h_direct(big_t, np.exp(zb))
            zb = np.append(zb, 0.0)
            values = np.append(values, 0.0)
            with self._lock:
                self._h_tables.setdefault(big_t, CubicSpline(zb, values))
        return self._h_tables[big_t]

    def _h_direct(self, big_t: int, b: np.ndarray, panels: int = 60) -> np.ndarray:
        """``H_T(b) = int_0^(1-b) G(T - w)/(w + b) dw`` by panel Gauss rules."""
        xg, wg = gauss_legendre(_PANEL_NODES)
        unit = (np.arange(panels)[:, None] + xg).ravel() / panels
        wunit = np.tile(wg / panels, panels)
        lb = np.log(b)
        top = np.minimum(0.5, 1.0 - b)
        # w in [0, top]: w + b = e^q
        q_lo, q_hi = lb, np.log(top + b)
        q = q_lo[:, None] + (q_hi - q_lo)[:, None] * unit
        w = np.exp(q) - b[:, None]
        w = np.clip(w, 0.0, None)
        part_a = (self._g_left(big_t, 1.0 - w) @ wunit) * (q_hi - q_lo)
        # w in [1/2, 1 - b]: 1 - w = e^z
        out = part_a
        far = b < 0.5
        if np.any(far):
            bf = b[far]
            z_lo, z_hi = np.log(bf), math.log(0.5)
            z = z_lo[:, None] + (z_hi - z_lo)[:, None] * unit
            d = np.exp(z)
            vals = self._g_left(big_t, d) * d / (1.0 - d + bf[:, None])
            out = out.copy()
            out[far] += (vals @ wunit) * (z_hi - z_lo)
        return out

    def _extend_direct(self, big_t: int, tau: np.ndarray) -> np.ndarray:
        """``G(T + tau)`` for ``tau`` in ``(0, 1]`` from the straddle integral."""
        tau = np.asarray(tau, dtype=float)
        h_spline = self._h_spline(big_t)

        def h_of(b):
            return h_spline(np.log(b))

        xg, wg = gauss_legendre(_PANEL_NODES)
        # b in [tau e^-40, tau/2], b = e^z
        pz = 20
        unit = (np.arange(pz)[:, None] + xg).ravel() / pz
        wunit = np.tile(wg / pz, pz)
        z_lo = np.log(tau) - 40.0
        z_hi = np.log(tau / 2.0)
        z = z_lo[:, None] + (z_hi - z_lo)[:, None] * unit
        b = np.exp(z)
        part_b = ((self._g_unit(tau[:, None] - b) * h_of(b) * b) @ wunit) * (z_hi - z_lo)
        # w = tau - b in [tau e^-40, tau/2], w = exp(-e^y)
        py = 8
        unit = (np.arange(py)[:, None] + xg).ravel() / py
        wunit = np.tile(wg / py, py)
        w_lo = tau * math.exp(-40.0)
        y_lo = np.log(np.log(2.0 / tau))
        y_hi = np.log(-np.log(w_lo))
        y = y_lo[:, None] + (y_hi - y_lo)[:, None] * unit
        w = np.exp(-np.exp(y))
        part_w = ((self._g_unit(w) * w * np.exp(y) * h_of(tau[:, None] - w)) @ wunit) * (y_hi - y_lo)
        # w below w_lo: H(tau - w) ~ H(tau)
        tail = self.G_bar_array(w_lo) * h_of(tau)
        return part_b + part_w + tail

    def _interval_spline(self, big_t: int) -> CubicSpline:
        if big_t not in self._intervals:
            if big_t > 1:
                self._interval_spline(big_t - 1)
            z = np.concatenate(
                [
                    np.arange(0.0, _CUSP_Z_FINE, _CUSP_Z_FINE_STEP),
                    np.arange(_CUSP_Z_FINE, _CUSP_Z_MAX + _CUSP_Z_STEP / 2, _CUSP_Z_STEP),
                ]
            )
            values = self._extend_direct(big_t, np.exp(-z))
            with self._lock:
                self._intervals.setdefault(big_t, CubicSpline(z, values))
        return self._intervals[big_t]

    # -- public ----------------------------------------------------------------

    def extend(self, t: float) -> float:
        """``G_theta(t)`` for any ``t > 0``; ``t <= 1`` delegates to :meth:`G`."""
        t = float(t)
        if not t > 0.0:
            raise DomainError(f"t must be positive, got {t!r}")
        if t <= 1.0:
            return self.G(t)
        big_t = int(math.ceil(t)) - 1
        tau = t - big_t
        cell = tau / EXTENSION_STEP
        on_grid = abs(cell - round(cell)) < 1e-9
        key = (big_t, int(round(cell)))
        if on_grid and key in self.extension_cache:
            return self.extension_cache[key]
        if big_t > 1:
            self._interval_spline(big_t - 1)
        value = float(self._extend_direct(big_t, np.array([tau]))[0])
        if on_grid:
            self.extension_cache.setdefault(key, value)
        return value

    def extension_table(self, big_t: int) -> tuple[np.ndarray, np.ndarray]:
        """``G`` on the ``2**-10`` grid of ``(T, T+1]``, filling the memo table."""
        if big_t < 1:
            raise DomainError("extension tables start at T = 1")
        if big_t > 1:
            self._interval_spline(big_t - 1)
        m = round(1.0 / EXTENSION_STEP)
        idx = np.arange(1, m + 1)
        missing = [j for j in idx if (big_t, int(j)) not in self.extension_cache]
        if missing:
            vals = self._extend_direct(big_t, np.asarray(missing) * EXTENSION_STEP)
            for j, v in zip(missing, vals):
                self.extension_cache.setdefault((big_t, int(j)), float(v))
        t = big_t + idx * EXTENSION_STEP
        return t, np.array([self.extension_cache[(big_t, int(j))] for j in idx])


_EVALUATORS: dict[float, GreenEvaluator] = {}
_EVALUATORS_LOCK = threading.Lock()


def evaluator(theta: float) -> GreenEvaluator:
    """Shared evaluator for ``theta``."""
    theta = float(theta)
    ev = _EVALUATORS.get(theta)
    if ev is None:
        with _EVALUATORS_LOCK:
            ev = _EVALUATORS.setdefault(theta, GreenEvaluator(theta))
    return ev


def green_G(theta: float, t: float) -> float:
    """Continuum Green function ``G_theta(t)`` for ``0 < t <= 1``.

    Examples
    --------
    >>> green_G(1.0, 0.3) > green_G(0.0, 0.3)
    True
    """
    t = float(t)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    if t > 1.0:
        raise DomainError("green_G covers (0, 1]; use green_extend for t > 1")
    return evaluator(theta).G(t)


def green_extend(theta: float, t: float) -> float:
    """``G_theta(t)`` for ``t > 1`` via the straddle decomposition at integers."""
    return evaluator(theta).extend(t)


def green_bar(theta: float, u: float) -> float:
    """Integrated Green function ``Gbar_theta(u) = int_0^u G_theta`` on ``(0, 1]``."""
    return evaluator(theta).G_bar(u)


def green_spacetime(theta: float, c: float, t: float, x) -> float:
    """Space-time Green function ``G_theta(t) g_{ct}(x)``."""
    return green_extend(theta, t) * heat_kernel(c, t, x)


def green_direct(theta: float, t: float, h: float | None = None, t_max: float | None = None) -> float:
    """Independent route ``int_0^inf e^(theta s) f_s(t) ds`` from the density tables.

    Used as a cross-check of :func:`green_extend`; it evaluates the Dickman
    density for each quadrature node in ``s``.
    """
    from . import dickman_core as dc

    t = float(t)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t!r}")
    h = dc.DEFAULT_H if h is None else h
    t_max = max(1, math.ceil(t)) if t_max is None else t_max
    # f_s(t) <= s t^(s-1) e^(-gamma s)/Gamma(s+1), the G integrand.
    smax = _cutoff(_log_integrand_G, theta, t)
    panels = 48
    xg, wg = gauss_legendre(12)
    total = []
    for p in range(panels):
        lo, hi = smax * p / panels, smax * (p + 1) / panels
        for x, w in zip(xg, wg):
            s = lo + (hi - lo) * x
            total.append(w * (hi - lo) * math.exp(theta * s) * dc.density_f(s, t, h, t_max))
    return math.fsum(total)


def green_table(theta: float, ts: Sequence[float]) -> np.ndarray:
    """``G_theta`` at several points, vectorized on ``(0, 1]``."""
    ts = np.asarray(ts, dtype=float)
    out = np.empty_like(ts)
    ev = evaluator(theta)
    low = ts <= 1.0
    if np.any(low):
        out[low] = ev.G_array(ts[low])
    for i in np.nonzero(~low)[0]:
        out[i] = ev.extend(float(ts[i]))
    return out
