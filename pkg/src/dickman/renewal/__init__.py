"""Triangular renewal arrays: laws, densities, theorem checks and bounds."""

from .bounds import (
    FROZEN,
    bound_fuk_nagaev,
    bound_lower_tail,
    bound_sharp_local,
    max_lower_tail_c,
    sweep_fuk_nagaev,
    sweep_lower_tail,
    sweep_sharp_local,
)
from .density import (
    RenewalDensity,
    all_tau_pmfs,
    exact_tau_pmf,
    renewal_by_k_sum,
    renewal_density,
    straddle_sum,
)
from .laws import InterArrivalLaw, lambda_for_theta, law_from_harmonic
from .spacetime import (
    SpaceTimeDensity,
    SpaceTimeLaw,
    discrete_gaussian_law,
    spacetime_point_density,
    spacetime_renewal_density,
)
from .verify import (
    TheoremReport,
    diffusive_tail,
    parity_adjust,
    verify_renewal_theorem,
    verify_spacetime_theorem,
)

__all__ = [
    "FROZEN",
    "InterArrivalLaw",
    "RenewalDensity",
    "SpaceTimeDensity",
    "SpaceTimeLaw",
    "TheoremReport",
    "all_tau_pmfs",
    "bound_fuk_nagaev",
    "bound_lower_tail",
    "bound_sharp_local",
    "diffusive_tail",
    "discrete_gaussian_law",
    "exact_tau_pmf",
    "lambda_for_theta",
    "law_from_harmonic",
    "max_lower_tail_c",
    "parity_adjust",
    "renewal_by_k_sum",
    "renewal_density",
    "spacetime_point_density",
    "spacetime_renewal_density",
    "straddle_sum",
    "sweep_fuk_nagaev",
    "sweep_lower_tail",
    "sweep_sharp_local",
    "verify_renewal_theorem",
    "verify_spacetime_theorem",
]
