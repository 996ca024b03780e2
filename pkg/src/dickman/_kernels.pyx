# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled renewal recursions.

Both kernels evaluate

    U(0) = u0,   U(n) = lam * sum_{m=1}^{min(n, N)} K(m) U(n - m)

where ``K`` has length N + 1 and ``K[0]`` is ignored.  The batched variant runs
one independent recursion per column (one column per Fourier mode in the
space-time solver).
"""

import numpy as np
cimport numpy as cnp

from libc.math cimport fabs, sqrt

cnp.import_array()

ctypedef fused scalar_t:
    double
    double complex


def renewal_recursion(const double[::1] kernel, double lam, Py_ssize_t n_max,
                      double guard=1e300):
    cdef Py_ssize_t big_n = kernel.shape[0] - 1
    cdef Py_ssize_t n, m, mmax
    cdef double a0, a1, a2, a3, acc
    cdef const double* k
    cdef double* u
    out = np.zeros(n_max + 1, dtype=np.float64)
    cdef double[::1] view = out
    u = &view[0]
    k = &kernel[0]
    u[0] = 1.0
    for n in range(1, n_max + 1):
        mmax = n if n < big_n else big_n
        # four partial sums let the compiler keep independent add chains
        a0 = a1 = a2 = a3 = 0.0
        m = 1
        while m + 3 <= mmax:
            a0 += k[m] * u[n - m]
            a1 += k[m + 1] * u[n - m - 1]
            a2 += k[m + 2] * u[n - m - 2]
            a3 += k[m + 3] * u[n - m - 3]
            m += 4
        while m <= mmax:
            a0 += k[m] * u[n - m]
            m += 1
        acc = lam * ((a0 + a1) + (a2 + a3))
        if fabs(acc) > guard:
            raise OverflowError(f"renewal density exceeds {guard:g} at n={n}")
        u[n] = acc
    return out


cdef enum:
    TILE = 8  # columns per register tile


cdef void _row_real(const double* k, double* u, Py_ssize_t n, Py_ssize_t mmax,
                    Py_ssize_t width) noexcept nogil:
    # row n = sum_m k[m] * u[n - m], TILE columns at a time held in registers
    cdef Py_ssize_t f0, f, m
    cdef double acc[8]
    cdef const double* kp
    cdef const double* up
    f0 = 0
    while f0 + TILE <= width:
        for f in range(TILE):
            acc[f] = 0.0
        for m in range(1, mmax + 1):
            kp = k + m * width + f0
            up = u + (n - m) * width + f0
            for f in range(TILE):
                acc[f] += kp[f] * up[f]
        for f in range(TILE):
            u[n * width + f0 + f] = acc[f]
        f0 += TILE
    for f in range(width - width % TILE, width):
        acc[0] = 0.0
        for m in range(1, mmax + 1):
            acc[0] += k[m * width + f] * u[(n - m) * width + f]
        u[n * width + f] = acc[0]


cdef void _row_complex(const double complex* k, double complex* u, Py_ssize_t n,
                       Py_ssize_t mmax, Py_ssize_t width) noexcept nogil:
    cdef Py_ssize_t f, m
    cdef double complex acc
    for f in range(width):
        acc = 0.0
        for m in range(1, mmax + 1):
            acc = acc + k[m * width + f] * u[(n - m) * width + f]
        u[n * width + f] = acc


def _batched(scalar_t[:, ::1] kernel, scalar_t lam, scalar_t[:, ::1] u,
             double guard):
    cdef Py_ssize_t big_n = kernel.shape[0] - 1
    cdef Py_ssize_t n_max = u.shape[0] - 1
    cdef Py_ssize_t width = u.shape[1]
    cdef Py_ssize_t n, f, mmax
    cdef double worst, mag
    cdef scalar_t* row
    if width == 0:
        return
    for n in range(1, n_max + 1):
        mmax = n if n < big_n else big_n
        with nogil:
            if scalar_t is double:
                _row_real(&kernel[0, 0], &u[0, 0], n, mmax, width)
            else:
                _row_complex(&kernel[0, 0], &u[0, 0], n, mmax, width)
        row = &u[n, 0]
        worst = 0.0
        for f in range(width):
            row[f] = row[f] * lam
            if scalar_t is double:
                mag = fabs(row[f])
            else:
                mag = sqrt(row[f].real ** 2 + row[f].imag ** 2)
            if mag > worst:
                worst = mag
        if worst > guard:
            raise OverflowError(f"renewal density exceeds {guard:g} at n={n}")


def renewal_recursion_batched(kernel, lam, Py_ssize_t n_max, initial=None,
                              double guard=1e300):
    kernel = np.ascontiguousarray(kernel)
    dtype = np.complex128 if np.iscomplexobj(kernel) else np.float64
    kernel = kernel.astype(dtype, copy=False)
    out = np.zeros((n_max + 1, kernel.shape[1]), dtype=dtype)
    out[0] = 1.0 if initial is None else initial
    if dtype == np.float64:
        _batched(kernel, float(lam), out, guard)
    else:
        _batched(kernel, complex(lam), out, guard)
    return out
