"""NumPy fallback backend for the hot kernels.

Same contract as the compiled extension: Young-function evaluation over value
arrays, the weighted modular sum, and the Luxemburg-norm bisection loop.
"""
from __future__ import annotations

import numpy as np

BACKEND = "pure"

POWER = 0
EXP_MINUS = 1
POWER_LOG = 2
TABULATED = 3

_EMPTY = np.empty(0)


def phi_array(kind, p, c, kx, ky, x):
    """phi applied elementwise to nonnegative x; overflow saturates to inf."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == POWER:
            return c * np.power(x, p)
        if kind == EXP_MINUS:
            return np.expm1(x) - x
        if kind == POWER_LOG:
            return np.power(x, p) * np.log1p(x)
        if kind == TABULATED:
            j = np.searchsorted(kx, x, side="right") - 1
            j = np.clip(j, 0, len(kx) - 2)
            x0 = kx[j]
            slope = (ky[j + 1] - ky[j]) / (kx[j + 1] - x0)
            return ky[j] + slope * (x - x0)
    raise ValueError(f"unknown family code {kind}")


def weighted_modular(kind, p, c, kx, ky, values, weights, scale):
    """sum(weights * phi(scale*|values|)); zero weights are skipped."""
    v = np.abs(np.asarray(values, dtype=np.float64))
    w = np.asarray(weights, dtype=np.float64)
    mask = w != 0.0
    if not mask.all():
        v = v[mask]
        w = w[mask]
    if v.size == 0:
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        terms = phi_array(kind, p, c, kx, ky, v * scale) * w
        return float(np.sum(terms))


def luxemburg_root(kind, p, c, kx, ky, values, weights, rel_tol, max_iter):
    """Bisection for inf{k : modular(f/k) <= 1} over plain value/weight arrays.

    The caller guarantees f is not a.e. zero and the modular is finite for
    large k. Returns (k, modular(f/k) - 1, iterations).
    """
    v = np.abs(np.asarray(values, dtype=np.float64))
    w = np.asarray(weights, dtype=np.float64)
    mask = w != 0.0
    v = v[mask]
    w = w[mask]

    def mod(k):
        return weighted_modular(kind, p, c, kx, ky, v, w, 1.0 / k)

    k = max(float(v.max()), 1e-300)
    it = 0
    if mod(k) > 1.0:
        lo = k
        hi = k * 2.0
        while mod(hi) > 1.0:
            lo = hi
            hi *= 2.0
            it += 1
            if it > 4200:
                raise OverflowError("luxemburg bracket expansion failed")
    else:
        hi = k
        lo = k * 0.5
        while mod(lo) <= 1.0:
            hi = lo
            lo *= 0.5
            it += 1
            if it > 4200:
                raise OverflowError("luxemburg bracket shrink failed")
    n = 0
    while n < max_iter and (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if mod(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        n += 1
    k = 0.5 * (lo + hi)
    return k, mod(k) - 1.0, it + n
