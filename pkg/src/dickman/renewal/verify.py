"""Desk-scale checks of the renewal theorems.

The limit theorems come without rates, so reports only say whether the
relative error shrinks along the sequence of cutoffs and how large it is
at the end. Tolerances used by callers are empirical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError
from ..green import green_extend, heat_kernel
from .density import renewal_density
from .laws import InterArrivalLaw, lambda_for_theta, law_from_harmonic
from .spacetime import SpaceTimeDensity, SpaceTimeLaw, spacetime_point_density


@dataclass(frozen=True)
class TheoremReport:
    """Ratios of exact renewal values to their continuum limits."""

    Ns: tuple[int, ...]
    ratios: tuple[float, ...]
    limit: float
    notes: dict = field(default_factory=dict)

    @property
    def errors(self) -> tuple[float, ...]:
        return tuple(abs(r - 1.0) for r in self.ratios)

    @property
    def monotone(self) -> bool:
        e = self.errors
        return all(b <= a for a, b in zip(e, e[1:]))

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    def passes(self, tol: float) -> bool:
        return self.monotone and self.final_error < tol


def verify_renewal_theorem(
    N_list: Sequence[int],
    theta: float,
    t: float,
    law_factory: Callable[[int], InterArrivalLaw] = law_from_harmonic,
    green: Callable[[float, float], float] = green_extend,
) -> TheoremReport:
    """Ratios ``[N/ln N U(n)] / G_theta(t)`` with ``n = round(t N)``.

    Parameters
    ----------
    N_list : sequence of int
        Cutoffs, each at least 2.
    theta : float
    t : float
        Rescaled time in ``(0, 1]``.
    law_factory : callable, optional
        Builds the law for a cutoff; harmonic by default.
    green : callable, optional
        ``green(theta, t)``; swap in another route for a cross-check.
    """
    if not 0.0 < t <= 1.0:
        raise DomainError("t must lie in (0, 1]")
    limit = green(theta, t)
    ratios = []
    for N in N_list:
        if N < 2:
            raise DomainError("each N must be at least 2")
        n = int(round(t * N))
        law = law_factory(N)
        u = renewal_density(law, lambda_for_theta(N, theta), n)
        ratios.append(N / math.log(N) * u[n] / limit)
    return TheoremReport(Ns=tuple(N_list), ratios=tuple(ratios), limit=limit)


def parity_adjust(n: int, x: np.ndarray) -> np.ndarray:
    """Move ``x`` to the checkerboard ``sum(x) = n (mod 2)`` by nudging ``x_1`` toward 0."""
    x = np.array(x, dtype=int)
    if (int(x.sum()) - n) % 2:
        x[0] += -1 if x[0] > 0 else 1
    return x


def verify_spacetime_theorem(
    Ns: Sequence[int],
    theta: float,
    t: float,
    x_scaled,
    law_factory: Callable[[int], SpaceTimeLaw] | None = None,
) -> TheoremReport:
    """Ratios of ``N^(1+d/2)/ln N bsU(n, x)`` to ``G_theta(t) g_{ct}(x_scaled)``.

    ``n = round(t N)`` and ``x = round(x_scaled sqrt(N))``, moved onto the
    checkerboard when the law lives there, in which case the limit carries
    the factor 2 of the sublattice cell area. The default law is the
    directed-polymer kernel.
    """
    if law_factory is None:
        from ..models import polymer_spacetime_law

        law_factory = polymer_spacetime_law
    x_scaled = np.atleast_1d(np.asarray(x_scaled, dtype=float))
    ratios = []
    notes: dict = {"x": []}
    limit = None
    for N in Ns:
        law = law_factory(N)
        n = int(round(t * N))
        x = np.rint(x_scaled * math.sqrt(N)).astype(int)
        if law.checkerboard:
            x = parity_adjust(n, x)
        notes["x"].append(tuple(int(v) for v in x))
        lam = lambda_for_theta(N, theta)
        value = spacetime_point_density(law, lam, n, x)
        factor = 2.0 if law.checkerboard else 1.0
        limit = green_extend(theta, t) * heat_kernel(law.c, t, x_scaled) * factor
        ratios.append(N ** (1.0 + law.d / 2.0) / math.log(N) * value / limit)
    return TheoremReport(Ns=tuple(Ns), ratios=tuple(ratios), limit=float(limit), notes=notes)


def diffusive_tail(density: SpaceTimeDensity, n: int, M: float) -> float:
    """``sum_{|x| > M sqrt(n)} bsU(n, x) / U(n)`` with the Euclidean norm."""
    coords = density.coordinates()
    grids = np.meshgrid(*([coords] * density.d), indexing="ij")
    r2 = sum(g.astype(float) ** 2 for g in grids)
    layer = density.field[n]
    total = math.fsum(layer.ravel())
    outside = math.fsum(layer[r2 > M * M * n].ravel())
    return outside / total
