# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot kernels (Young-function evaluation, weighted
modular sums, Luxemburg bisection).  Mirrors _kernels.pure exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport expm1, fabs, log1p, pow

cnp.import_array()

BACKEND = "compiled"

DEF K_POWER = 0
DEF K_EXP_MINUS = 1
DEF K_POWER_LOG = 2
DEF K_TABULATED = 3


cdef inline double _phi(int kind, double p, double c,
                        const double[::1] kx, const double[::1] ky,
                        double x) noexcept nogil:
    cdef Py_ssize_t lo, hi, mid
    cdef double slope
    if kind == K_POWER:
        return c * pow(x, p)
    elif kind == K_EXP_MINUS:
        return expm1(x) - x
    elif kind == K_POWER_LOG:
        return pow(x, p) * log1p(x)
    else:
        # piecewise linear through (kx, ky); last-segment slope beyond the end
        lo = 0
        hi = kx.shape[0] - 1
        if x >= kx[hi - 1]:
            lo = hi - 1
        else:
            while hi - lo > 1:
                mid = (lo + hi) >> 1
                if kx[mid] <= x:
                    lo = mid
                else:
                    hi = mid
        slope = (ky[lo + 1] - ky[lo]) / (kx[lo + 1] - kx[lo])
        return ky[lo] + slope * (x - kx[lo])


cdef double _modular(int kind, double p, double c,
                     const double[::1] kx, const double[::1] ky,
                     const double[::1] v, const double[::1] w,
                     double scale) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(v.shape[0]):
        if w[i] != 0.0:
            acc += w[i] * _phi(kind, p, c, kx, ky, scale * fabs(v[i]))
    return acc


def phi_array(int kind, double p, double c, kx, ky, x):
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xs)
    cdef double[::1] kxv = np.ascontiguousarray(kx if kx is not None else (), dtype=np.float64)
    cdef double[::1] kyv = np.ascontiguousarray(ky if ky is not None else (), dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xs.shape[0]):
        out[i] = _phi(kind, p, c, kxv, kyv, xs[i])
    return out


def weighted_modular(int kind, double p, double c, kx, ky, values, weights, double scale):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] kxv = np.ascontiguousarray(kx if kx is not None else (), dtype=np.float64)
    cdef double[::1] kyv = np.ascontiguousarray(ky if ky is not None else (), dtype=np.float64)
    return _modular(kind, p, c, kxv, kyv, v, w, scale)


def luxemburg_root(int kind, double p, double c, kx, ky, values, weights,
                   double rel_tol, int max_iter):
    cdef double[::1] v = np.ascontiguousarray(np.abs(values), dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] kxv = np.ascontiguousarray(kx if kx is not None else (), dtype=np.float64)
    cdef double[::1] kyv = np.ascontiguousarray(ky if ky is not None else (), dtype=np.float64)
    cdef double vmax = 0.0, lo, hi, mid, k
    cdef Py_ssize_t i
    cdef int it = 0, n = 0
    for i in range(v.shape[0]):
        if w[i] != 0.0 and v[i] > vmax:
            vmax = v[i]
    k = vmax if vmax > 1e-300 else 1e-300
    if _modular(kind, p, c, kxv, kyv, v, w, 1.0 / k) > 1.0:
        lo = k
        hi = 2.0 * k
        while _modular(kind, p, c, kxv, kyv, v, w, 1.0 / hi) > 1.0:
            lo = hi
            hi *= 2.0
            it += 1
            if it > 4200:
                raise OverflowError("luxemburg bracket expansion failed")
    else:
        hi = k
        lo = 0.5 * k
        while _modular(kind, p, c, kxv, kyv, v, w, 1.0 / lo) <= 1.0:
            hi = lo
            lo *= 0.5
            it += 1
            if it > 4200:
                raise OverflowError("luxemburg bracket shrink failed")
    while n < max_iter and (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _modular(kind, p, c, kxv, kyv, v, w, 1.0 / mid) > 1.0:
            lo = mid
        else:
            hi = mid
        n += 1
    k = 0.5 * (lo + hi)
    return k, _modular(kind, p, c, kxv, kyv, v, w, 1.0 / k) - 1.0, it + n
