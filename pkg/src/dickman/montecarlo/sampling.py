"""Simulation of the Dickman subordinator and of renewal arrays.

Samples are produced in fixed blocks of :data:`BLOCK` draws. Block ``b`` of
stream ``tag`` owns the generator seeded by ``SeedSequence(seed,
spawn_key=(tag, b))``, so output does not depend on how many threads run
the blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from ..dickman_core import build_density_grid
from ..errors import DomainError
from ..renewal.laws import InterArrivalLaw
from ..renewal.spacetime import SpaceTimeLaw
from .stats import ks_statistic, ks_two_sample, ks_two_sample_critical

BLOCK = 8192
MIN_ACCEPTED = 100

STREAM_DICKMAN = 0
STREAM_REFERENCE = 1
STREAM_RENEWAL = 2


@dataclass(frozen=True)
class SimulationConfig:
    """Seed, sample count, jump cutoff ``epsilon`` and subordinator time ``s``."""

    seed: int
    samples: int
    epsilon: float = 1e-4
    s: float = 1.0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.samples) < 1:
            raise DomainError("samples must be at least 1")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")
        if not self.s > 0.0:
            raise DomainError("s must be positive")


def default_threads() -> int:
    """Thread count from ``DICKMAN_THREADS``, else 1."""
    raw = os.environ.get("DICKMAN_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"DICKMAN_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise DomainError("DICKMAN_THREADS must be at least 1")
    return value


def block_generator(seed: int, tag: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(tag, block))))


def _run_blocks(samples: int, work: Callable[[int, int], tuple], threads: Optional[int]) -> list:
    """Run ``work(block, size)`` for every block and return results in block order."""
    threads = default_threads() if threads is None else int(threads)
    sizes = [min(BLOCK, samples - lo) for lo in range(0, samples, BLOCK)]
    jobs = list(enumerate(sizes))
    if threads <= 1 or len(jobs) == 1:
        return [work(b, n) for b, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: work(*job), jobs))


# ---------------------------------------------------------------------------
# Dickman subordinator


@dataclass(frozen=True)
class DickmanSample:
    """Truncated values ``Y`` and largest jumps ``M`` (0 when there is none)."""

    Y: np.ndarray
    M: np.ndarray

    def __len__(self) -> int:
        return self.Y.size

    def __iter__(self):
        return zip(self.Y.tolist(), self.M.tolist())


def _dickman_block(rng: np.random.Generator, size: int, s: float, eps: float) -> tuple[np.ndarray, np.ndarray]:
    log_eps = math.log(eps)
    counts = rng.poisson(-s * log_eps, size)
    # P(jump > x) = ln x / ln eps on [eps, 1], so jump = eps^U
    jumps = np.exp(rng.random(int(counts.sum())) * log_eps)
    Y = np.zeros(size)
    M = np.zeros(size)
    hit = counts > 0
    if np.any(hit):
        starts = (np.cumsum(counts) - counts)[hit]
        Y[hit] = np.add.reduceat(jumps, starts)
        M[hit] = np.maximum.reduceat(jumps, starts)
    return Y, M


def sample_dickman(cfg: SimulationConfig, threads: Optional[int] = None, tag: int = STREAM_DICKMAN) -> DickmanSample:
    """Draw ``Y_s`` with jumps below ``epsilon`` discarded, and the largest jump.

    The jumps form a Poisson process with intensity ``dt/t`` on
    ``[epsilon, 1]``: their number is Poisson with mean ``s ln(1/epsilon)``
    and each is ``epsilon^U`` with ``U`` uniform. The discarded mass has mean
    ``s epsilon``.

    Parameters
    ----------
    cfg : SimulationConfig
    threads : int, optional
        Worker threads; defaults to ``DICKMAN_THREADS`` or 1. The output is
        the same for every thread count.
    tag : int
        Stream label; independent draws use distinct tags.
    """

    def work(b: int, size: int):
        return _dickman_block(block_generator(cfg.seed, tag, b), size, cfg.s, cfg.epsilon)

    parts = _run_blocks(int(cfg.samples), work, threads)
    return DickmanSample(Y=np.concatenate([p[0] for p in parts]), M=np.concatenate([p[1] for p in parts]))


@dataclass(frozen=True)
class ScaleInvarianceResult:
    statistic: float
    accepted: int
    reference: int
    critical: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical


def test_scale_invariance(cfg: SimulationConfig, t: float, threads: Optional[int] = None) -> ScaleInvarianceResult:
    """Compare ``Y_s / t`` given ``M_s < t`` with an independent copy of ``Y_s``.

    Returns the two-sample KS distance and its 1% critical value.

    Raises
    ------
    DomainError
        If ``t`` is not in ``(10 epsilon, 1]`` or fewer than
        :data:`MIN_ACCEPTED` runs satisfy ``M_s < t``.
    """
    t = float(t)
    if not 10.0 * cfg.epsilon < t <= 1.0:
        raise DomainError("t must lie in (10 epsilon, 1]")
    draws = sample_dickman(cfg, threads, tag=STREAM_DICKMAN)
    keep = draws.M < t
    accepted = int(np.count_nonzero(keep))
    if accepted < MIN_ACCEPTED:
        raise DomainError(
            f"only {accepted} runs with M_s < {t}; raise samples (acceptance is about t^s = {t ** cfg.s:.3g})"
        )
    reference = sample_dickman(cfg, threads, tag=STREAM_REFERENCE).Y
    stat = ks_two_sample(draws.Y[keep] / t, reference)
    return ScaleInvarianceResult(
        statistic=stat, accepted=accepted, reference=reference.size,
        critical=ks_two_sample_critical(accepted, reference.size, 0.01),
    )


test_scale_invariance.__test__ = False  # not a pytest test


# ---------------------------------------------------------------------------
# renewal arrays


@dataclass(frozen=True)
class RenewalSample:
    """``tau_k`` for each run and, for space-time laws, ``S_k`` of shape ``(runs, d)``."""

    tau: np.ndarray
    S: Optional[np.ndarray] = None


def _renewal_block(rng, size: int, steps: int, base: InterArrivalLaw, law: Optional[SpaceTimeLaw]):
    cdf = np.cumsum(base.pmf[1:])
    u = rng.random((size, steps))
    T = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), base.N - 1) + 1
    tau = T.sum(axis=1)
    if law is None:
        return tau, None
    flat = T.ravel()
    v = rng.random((flat.size, law.d))
    X = np.empty((flat.size, law.d), dtype=np.int64)
    order = np.argsort(flat, kind="stable")
    values, starts = np.unique(flat[order], return_index=True)
    for m, lo, hi in zip(values, starts, list(starts[1:]) + [flat.size]):
        sel = order[lo:hi]
        X[sel] = law.sample_steps(int(m), v[sel])
    S = X.reshape(size, steps, law.d).sum(axis=1)
    return tau, S


def sample_renewal_path(
    law: Union[InterArrivalLaw, SpaceTimeLaw],
    steps: int,
    cfg: SimulationConfig,
    threads: Optional[int] = None,
) -> RenewalSample:
    """Draw ``tau_steps`` (and ``S_steps``) for ``cfg.samples`` independent runs.

    Inter-arrival times come from inverse-CDF lookup in the law's table;
    spatial steps from :meth:`SpaceTimeLaw.sample_steps`.
    """
    steps = int(steps)
    if steps < 1:
        raise DomainError("steps must be at least 1")
    spacetime = law if isinstance(law, SpaceTimeLaw) else None
    base = law.base if spacetime is not None else law

    def work(b: int, size: int):
        return _renewal_block(block_generator(cfg.seed, STREAM_RENEWAL, b), size, steps, base, spacetime)

    parts = _run_blocks(int(cfg.samples), work, threads)
    tau = np.concatenate([p[0] for p in parts])
    S = None if spacetime is None else np.concatenate([p[1] for p in parts])
    return RenewalSample(tau=tau, S=S)


def dickman_cdf_vectorized(s: float, t_max: float = 16.0) -> Callable[[np.ndarray], np.ndarray]:
    """``P(Y_s <= t)`` by linear interpolation of the tabulated distribution function."""
    grid = build_density_grid(s, t_max=t_max)
    t = np.concatenate(([0.0], grid.t))
    F = np.concatenate(([0.0], grid.cdf))

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, t, F, left=0.0, right=1.0)

    return cdf


def renewal_ks(N: int, steps: int, cfg: SimulationConfig, threads: Optional[int] = None) -> float:
    """KS distance between ``tau_steps / N`` under the harmonic law and ``Y_{cfg.s}``."""
    from ..renewal.laws import law_from_harmonic

    draws = sample_renewal_path(law_from_harmonic(N), steps, cfg, threads)
    return ks_statistic(draws.tau / N, dickman_cdf_vectorized(cfg.s))
