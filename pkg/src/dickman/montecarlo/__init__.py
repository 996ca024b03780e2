"""Monte Carlo simulation and goodness-of-fit statistics."""

from .sampling import (
    BLOCK,
    DickmanSample,
    RenewalSample,
    ScaleInvarianceResult,
    SimulationConfig,
    default_threads,
    dickman_cdf_vectorized,
    renewal_ks,
    sample_dickman,
    sample_renewal_path,
    test_scale_invariance,
)
from .stats import (
    CHI2_QUANTILES,
    KOLMOGOROV_QUANTILES,
    chi2_critical,
    chi_square,
    ks_critical,
    ks_statistic,
    ks_two_sample,
    ks_two_sample_critical,
    mean_z,
    proportion_z,
)

__all__ = [
    "CHI2_QUANTILES",
    "KOLMOGOROV_QUANTILES",
    "BLOCK",
    "DickmanSample",
    "RenewalSample",
    "ScaleInvarianceResult",
    "SimulationConfig",
    "chi2_critical",
    "chi_square",
    "default_threads",
    "dickman_cdf_vectorized",
    "ks_critical",
    "ks_statistic",
    "ks_two_sample",
    "ks_two_sample_critical",
    "mean_z",
    "proportion_z",
    "renewal_ks",
    "sample_dickman",
    "sample_renewal_path",
    "test_scale_invariance",
]
