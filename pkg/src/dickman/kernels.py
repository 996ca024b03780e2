"""Hot loops for the renewal recursion, compiled when available.

The compiled extension ``dickman._kernels`` is used by default. Setting the
environment variable ``DICKMAN_PURE_PYTHON=1`` before import, or a failed
import, selects the numpy implementations below. Both backends evaluate

    U(0) = u0,   U(n) = lam * sum_{m=1}^{min(n, N)} K(m) U(n - m)

with ``K[0]`` ignored.
"""

from __future__ import annotations

import os

import numpy as np

DEFAULT_GUARD = 1e300


def _py_renewal_recursion(kernel, lam, n_max, guard=DEFAULT_GUARD):
    kernel = np.ascontiguousarray(kernel, dtype=float)
    big_n = kernel.shape[0] - 1
    u = np.zeros(n_max + 1)
    u[0] = 1.0
    rev = kernel[1:][::-1].copy()  # rev[-m] = K(m)
    for n in range(1, n_max + 1):
        mmax = min(n, big_n)
        acc = lam * float(np.dot(rev[big_n - mmax:], u[n - mmax:n]))
        if abs(acc) > guard:
            raise OverflowError(f"renewal density exceeds {guard:g} at n={n}")
        u[n] = acc
    return u


def _py_renewal_recursion_batched(kernel, lam, n_max, initial=None, guard=DEFAULT_GUARD):
    kernel = np.ascontiguousarray(kernel)
    dtype = np.complex128 if np.iscomplexobj(kernel) else np.float64
    kernel = kernel.astype(dtype, copy=False)
    big_n = kernel.shape[0] - 1
    rev = kernel[1:][::-1].copy()
    u = np.zeros((n_max + 1, kernel.shape[1]), dtype=dtype)
    u[0] = 1.0 if initial is None else initial
    for n in range(1, n_max + 1):
        mmax = min(n, big_n)
        row = lam * np.einsum("mf,mf->f", rev[big_n - mmax:], u[n - mmax:n])
        if np.max(np.abs(row)) > guard:
            raise OverflowError(f"renewal density exceeds {guard:g} at n={n}")
        u[n] = row
    return u


BACKEND = "python"
renewal_recursion = _py_renewal_recursion
renewal_recursion_batched = _py_renewal_recursion_batched

if not os.environ.get("DICKMAN_PURE_PYTHON"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        renewal_recursion = _kernels.renewal_recursion
        renewal_recursion_batched = _kernels.renewal_recursion_batched

__all__ = [
    "BACKEND",
    "DEFAULT_GUARD",
    "renewal_recursion",
    "renewal_recursion_batched",
]
