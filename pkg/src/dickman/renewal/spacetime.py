"""Space-time renewal densities on the integer lattice.

The density ``bsU(n, x) = sum_k lam^k P(tau_k = n, S_k = x)`` obeys

    bsU(n, .) = lam sum_{m=1}^{min(n, N)} P(T = m) p(m, .) * bsU(n - m, .),

a convolution in ``x``. On a torus of side ``L`` every Fourier mode ``k``
decouples into the scalar recursion with kernel ``P(T = m) phi_m(k)``, where
``phi_m`` is the characteristic function of ``p(m, .)``. The recursions for
all modes run together in :func:`dickman.kernels.renewal_recursion_batched`.

When ``L`` exceeds twice the reachable radius nothing wraps and the result
is exact. Otherwise the torus periodizes ``bsU``; the side is then chosen so
the wrapped Gaussian tail is below ``1e-14`` relative.

Kernels are symmetric under ``x -> -x``, so ``phi_m`` is real. Kernels
supported on the checkerboard ``x_1 + ... + x_d = n (mod 2)`` satisfy
``phi_m(k + pi) = (-1)^m phi_m(k)``, which halves the number of modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .. import kernels
from ..errors import DomainError
from .laws import InterArrivalLaw

DEFAULT_BUDGET = 2e8  # stored doubles for a full space-time field
_MODE_CHUNK = 256  # columns per batch; keeps the kernel block in cache
_TAIL_LOG = math.log(1e14)
_KERNEL_FLOOR = 1e-22  # |P(T=m) phi_m| below this is dropped

KernelFn = Callable[[int], tuple[np.ndarray, int]]
FourierFn = Callable[[int, int, np.ndarray], np.ndarray]
SamplerFn = Callable[[int, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SpaceTimeLaw:
    """Joint law ``P(T = n, X = x) = P(T = n) p(n, x)``.

    Attributes
    ----------
    base : InterArrivalLaw
    d : int
        Lattice dimension.
    c : float
        Variance per component per unit time of ``p(n, .)`` for large ``n``.
    kernel : callable
        ``kernel(n) -> (array, R)`` with ``p(n, .)`` on the box ``[-R, R]^d``.
    reach_per_step : float
        ``max_n R_n / n``; bounds the support of ``bsU(n, .)`` by
        ``reach_per_step * n``.
    checkerboard : bool
        Whether ``p(n, x) = 0`` unless ``sum(x) = n (mod 2)``.
    symmetric : bool
        Whether every ``p(n, .)`` is invariant under coordinate permutations
        and sign changes; modes are then computed once per orbit.
    fourier : callable, optional
        ``fourier(m_max, L, modes) -> phi`` of shape ``(m_max + 1, F)`` with
        ``phi[m, f] = sum_x p(m, x) cos(2 pi modes[f] . x / L)``.
        Defaults to FFTs of the periodized kernel arrays.
    name : str
    sampler : callable, optional
        ``sampler(m, u) -> x`` mapping uniforms ``u`` of shape ``(count, d)``
        to draws from ``p(m, .)``. Defaults to inversion of the flattened
        kernel array.
    """

    base: InterArrivalLaw
    d: int
    c: float
    kernel: KernelFn = field(repr=False)
    reach_per_step: float
    checkerboard: bool = False
    symmetric: bool = False
    fourier: Optional[FourierFn] = field(default=None, repr=False)
    name: str = "custom"
    sampler: Optional[SamplerFn] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.base.N

    def reach(self, n: int) -> int:
        return int(math.ceil(self.reach_per_step * n - 1e-9))

    def modes_fourier(self, m_max: int, L: int, modes: np.ndarray) -> np.ndarray:
        if self.fourier is not None:
            return self.fourier(m_max, L, modes)
        return periodized_fourier(self.kernel, self.d, m_max, L, modes)

    def sample_steps(self, m: int, u: np.ndarray) -> np.ndarray:
        """Draws from ``p(m, .)`` by inversion; ``u`` has shape ``(count, d)``."""
        if self.sampler is not None:
            return self.sampler(m, u)
        arr, rad = self.kernel(m)
        cdf = np.cumsum(arr.ravel())
        flat = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), cdf.size - 1)
        return np.stack(np.unravel_index(flat, arr.shape), axis=1) - rad

    def check(self, n_max: int | None = None, atol: float = 1e-12) -> None:
        """Check normalization, centering and symmetry of ``p(n, .)``.

        Raises
        ------
        DomainError
            On the first kernel that fails.
        """
        n_max = self.N if n_max is None else min(n_max, self.N)
        for n in range(1, n_max + 1):
            arr, rad = self.kernel(n)
            if abs(math.fsum(arr.ravel()) - 1.0) > 1e-14 * max(1, arr.size) ** 0.5 + 1e-14:
                raise DomainError(f"p({n}, .) does not sum to 1")
            if np.any(arr < 0.0):
                raise DomainError(f"p({n}, .) has negative entries")
            grid = np.arange(-rad, rad + 1)
            for axis in range(self.d):
                shape = [1] * self.d
                shape[axis] = grid.size
                if abs(float(np.sum(arr * grid.reshape(shape)))) > atol:
                    raise DomainError(f"p({n}, .) is not centered")
            if not np.allclose(arr, arr[(slice(None, None, -1),) * self.d], rtol=0, atol=1e-15):
                raise DomainError(f"p({n}, .) is not symmetric")


def periodized_fourier(kernel: KernelFn, d: int, m_max: int, L: int, modes: np.ndarray) -> np.ndarray:
    """Cosine transforms of the kernels folded onto the torus ``(Z/L)^d``."""
    out = np.zeros((m_max + 1, modes.shape[0]))
    idx = tuple(modes.T)
    for m in range(1, m_max + 1):
        arr, rad = kernel(m)
        torus = np.zeros((L,) * d)
        coords = np.arange(-rad, rad + 1) % L
        if 2 * rad + 1 <= L:
            torus[np.ix_(*([coords] * d))] = arr
        else:
            np.add.at(torus, np.ix_(*([coords] * d)), arr)
        out[m] = np.fft.fftn(torus).real[idx]
    return out


def discrete_gaussian_law(base: InterArrivalLaw, c: float, d: int = 2) -> SpaceTimeLaw:
    """Space-time law with ``p(n, x)`` proportional to ``exp(-|x|^2 / (2 c n))``.

    Each kernel is truncated where the discarded mass falls below ``1e-14``
    and renormalized.
    """
    c = float(c)
    if not c > 0.0:
        raise DomainError("c must be positive")
    cache: dict[int, tuple[np.ndarray, int]] = {}

    def radius(n: int) -> int:
        return int(math.ceil(math.sqrt(2.0 * c * n * (_TAIL_LOG + 2.0)))) + 1

    def one_dim(n: int) -> np.ndarray:
        rad = radius(n)
        one = np.exp(-(np.arange(-rad, rad + 1) ** 2) / (2.0 * c * n))
        return one / math.fsum(one)

    def kernel(n: int) -> tuple[np.ndarray, int]:
        if n not in cache:
            one = one_dim(n)
            arr = one
            for _ in range(d - 1):
                arr = np.multiply.outer(arr, one)
            arr.flags.writeable = False
            cache[n] = (arr, radius(n))
        return cache[n]

    @lru_cache(maxsize=4)
    def table(m_max: int, L: int) -> np.ndarray:
        folded = np.zeros((m_max + 1, L))
        for m in range(1, m_max + 1):
            rad = radius(m)
            np.add.at(folded[m], np.arange(-rad, rad + 1) % L, one_dim(m))
        psi = np.fft.fft(folded, axis=1).real
        psi.flags.writeable = False
        return psi

    def fourier(m_max: int, L: int, modes: np.ndarray) -> np.ndarray:
        psi = table(m_max, L)
        out = psi[:, modes[:, 0]].copy()
        for axis in range(1, d):
            out *= psi[:, modes[:, axis]]
        out[0] = 0.0
        return out

    @lru_cache(maxsize=1024)
    def one_dim_cdf(n: int) -> np.ndarray:
        return np.cumsum(one_dim(n))

    def sampler(m: int, u: np.ndarray) -> np.ndarray:
        cdf = one_dim_cdf(m)
        idx = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), cdf.size - 1)
        return idx - radius(m)

    reach = max(radius(n) / n for n in range(1, base.N + 1))
    return SpaceTimeLaw(
        base=base, d=d, c=c, kernel=kernel, reach_per_step=reach, symmetric=True,
        fourier=fourier, name=f"gaussian(c={c:g})", sampler=sampler,
    )


# ---------------------------------------------------------------------------


def _modes(L: int, d: int, half: bool) -> np.ndarray:
    first = np.arange(L // 2) if half else np.arange(L)
    axes = [first] + [np.arange(L)] * (d - 1)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _periodized_side(law: SpaceTimeLaw, n: int) -> int:
    exact = 2 * law.reach(n) + 2
    width = 2 * int(math.ceil(math.sqrt(2.0 * law.c * n * _TAIL_LOG))) + 2
    return min(exact, max(width, 8))


@dataclass(frozen=True)
class SpaceTimeDensity:
    """``bsU(n, x)`` on the box ``[-L/2, L/2)^d`` for ``n = 0..n_max``.

    ``field[n]`` is indexed so that ``field[n][origin + x] = bsU(n, x)``.
    ``exact`` records whether the torus was large enough to avoid wrapping.
    """

    law: str
    lam: float
    L: int
    d: int
    exact: bool
    field: np.ndarray = field(repr=False)

    @property
    def origin(self) -> int:
        return self.L // 2

    @property
    def n_max(self) -> int:
        return self.field.shape[0] - 1

    def at(self, n: int, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=int))
        if x.size != self.d:
            raise DomainError(f"x must have {self.d} components")
        if np.any(np.abs(x) >= self.origin):
            return 0.0 if self.exact else float("nan")
        return float(self.field[(n,) + tuple(self.origin + x)])

    def marginal(self) -> np.ndarray:
        """``sum_x bsU(n, x)`` for every ``n``."""
        flat = self.field.reshape(self.field.shape[0], -1)
        return np.array([math.fsum(row) for row in flat])

    def coordinates(self) -> np.ndarray:
        return np.arange(self.L) - self.origin


def _chunk_recursion(law: SpaceTimeLaw, lam: float, n_max: int, L: int, modes: np.ndarray, rows) -> np.ndarray:
    m_max = min(n_max, law.N)
    phi = law.modes_fourier(m_max, L, modes)
    phi *= law.base.pmf[: m_max + 1, None]
    # High modes have kernels that die off fast; drop entries below
    # _KERNEL_FLOOR and run columns in groups of similar effective length.
    live = np.abs(phi) > _KERNEL_FLOOR
    length = np.where(live.any(axis=0), m_max - np.argmax(live[::-1], axis=0), 0)
    order = np.argsort(length, kind="stable")
    out = np.empty((len(rows), modes.shape[0]))
    lo = 0
    while lo < order.size:
        cap = max(int(length[order[lo]]), 1)
        cap = min(m_max, 1 << (cap - 1).bit_length())
        hi = int(np.searchsorted(length[order], cap, side="right"))
        cols = order[lo:hi]
        u = kernels.renewal_recursion_batched(np.ascontiguousarray(phi[: cap + 1, cols]), lam, n_max)
        out[:, cols] = u[rows]
        lo = hi
    return out


def _mode_recursion(law: SpaceTimeLaw, lam: float, n_max: int, L: int, modes: np.ndarray, rows=None) -> np.ndarray:
    """Mode values ``U_hat(n, k)`` for ``n`` in ``rows`` (default all)."""
    rows = np.arange(n_max + 1) if rows is None else np.atleast_1d(rows)
    inverse = None
    if law.symmetric:
        canon = np.sort(np.minimum(modes, L - modes), axis=1)
        modes, inverse = np.unique(canon, axis=0, return_inverse=True)
        inverse = inverse.ravel()
    out = np.empty((rows.size, modes.shape[0]))
    for lo in range(0, modes.shape[0], _MODE_CHUNK):
        out[:, lo:lo + _MODE_CHUNK] = _chunk_recursion(law, lam, n_max, L, modes[lo:lo + _MODE_CHUNK], rows)
    return out if inverse is None else out[:, inverse]


def spacetime_renewal_density(
    law: SpaceTimeLaw,
    lam: float,
    n_max: int,
    L: int | None = None,
    budget: float = DEFAULT_BUDGET,
) -> SpaceTimeDensity:
    """Full space-time renewal density up to ``n_max``.

    Parameters
    ----------
    law : SpaceTimeLaw
    lam : float
        Non-negative weight per renewal.
    n_max : int
    L : int, optional
        Torus side. Defaults to ``2 reach(n_max) + 2`` (exact).
    budget : float
        Largest allowed ``(n_max + 1) L^d``.

    Raises
    ------
    DomainError
        For invalid arguments or when the field would exceed ``budget``.
    """
    lam = float(lam)
    if not lam >= 0.0:
        raise DomainError("lambda must be non-negative")
    n_max = int(n_max)
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    exact_side = 2 * law.reach(n_max) + 2
    if L is None:
        L = exact_side
    L = int(L)
    if law.checkerboard and L % 2:
        L += 1
    if (n_max + 1) * float(L) ** law.d > budget:
        raise DomainError(
            f"space-time field needs {(n_max + 1) * float(L) ** law.d:.3g} cells, "
            f"over the budget {budget:.3g}; lower n_max or raise the budget"
        )
    half = law.checkerboard
    modes = _modes(L, law.d, half)
    u_hat = _mode_recursion(law, lam, n_max, L, modes)
    shape = (L,) * law.d
    field_out = np.empty((n_max + 1,) + shape)
    parity = None
    if half:
        parity = np.indices(shape).sum(axis=0) % 2
    # sup-norm distance from the origin after fftshift; clears roundoff outside the reach
    centred = np.abs(np.indices(shape) - L // 2).max(axis=0)
    for n in range(n_max + 1):
        spec = np.empty(shape)
        if half:
            lowhalf = u_hat[n].reshape((L // 2,) + (L,) * (law.d - 1))
            spec[: L // 2] = lowhalf
            shift = np.roll(lowhalf, -(L // 2), axis=tuple(range(1, law.d))) if law.d > 1 else lowhalf
            spec[L // 2:] = shift * (-1.0) ** n
        else:
            spec[...] = u_hat[n].reshape(shape)
        vals = np.fft.ifftn(spec).real
        if half:
            vals[parity != n % 2] = 0.0
        np.maximum(vals, 0.0, out=vals)
        vals = np.fft.fftshift(vals)
        vals[centred > law.reach(n)] = 0.0
        field_out[n] = vals
    field_out.flags.writeable = False
    return SpaceTimeDensity(
        law=law.name, lam=lam, L=L, d=law.d, exact=L >= exact_side, field=field_out
    )


def spacetime_point_density(law: SpaceTimeLaw, lam: float, n: int, x, L: int | None = None) -> float:
    """``bsU(n, x)`` at a single point without storing the field.

    Uses the periodized torus when the exact one is too large; see the module
    notes for the side length.
    """
    n = int(n)
    x = np.atleast_1d(np.asarray(x, dtype=int))
    if x.size != law.d:
        raise DomainError(f"x must have {law.d} components")
    if law.checkerboard and (int(x.sum()) - n) % 2:
        return 0.0
    if n == 0:
        return 1.0 if not np.any(x) else 0.0
    if L is None:
        L = _periodized_side(law, n)
    L = int(L)
    if law.checkerboard and L % 2:
        L += 1
    half = law.checkerboard
    modes = _modes(L, law.d, half)
    u_n = _mode_recursion(law, lam, n, L, modes, rows=[n])[0]
    phase = np.cos(2.0 * math.pi * (modes @ x) / L)
    value = math.fsum(u_n * phase) / float(L) ** law.d
    if half:
        value *= 2.0  # partner modes k + pi contribute equally on the right parity
    return max(value, 0.0)
