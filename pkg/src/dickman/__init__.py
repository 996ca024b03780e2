"""Dickman subordinator densities, continuum Green functions, renewal arrays
and second moments of disordered pinning and directed-polymer models."""

__version__ = "0.1.0"

from .dickman_core import (
    DensityGrid,
    build_density_grid,
    cdf_F,
    chernoff_tail,
    density_f,
    dickman_rho,
    rho_grid,
    small_time_constant,
)
from .errors import DomainError, GridRangeError, VerificationError
from .green import (
    green_bar,
    green_direct,
    green_extend,
    green_G,
    green_spacetime,
    green_table,
    heat_kernel,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "DensityGrid",
    "DomainError",
    "GridRangeError",
    "VerificationError",
    "__version__",
    "build_density_grid",
    "cdf_F",
    "chernoff_tail",
    "density_f",
    "dickman_rho",
    "green_G",
    "green_bar",
    "green_direct",
    "green_extend",
    "green_spacetime",
    "green_table",
    "heat_kernel",
    "rho_grid",
    "small_time_constant",
]
