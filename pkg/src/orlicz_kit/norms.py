"""Modulars and norms on (weighted) Orlicz spaces of simple functions.

The modular is I(f) = sum over pieces of phi(|f(p)|) * omega(p) * mu(p)
(omega = 1 when no weight is given).  The Luxemburg norm is the root of the
nonincreasing map k -> I(f/k) at level 1, found by bisection; the Amemiya
norm minimizes (1 + I(k f)) / k by golden-section search.  Countable-family
contributions are evaluated exactly up to the truncation index and closed by
an analytic upper bound on the tail, used conservatively.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .errors import ComputationError, DomainError, NotInSpaceError
from .intervals import IntervalSet
from .orlicz import (DELTA2_HOLDS, OrliczFunction, check_delta2, evaluate,
                     right_inverse)
from .runs import aligned
from .spaces import (PieceSet, SimpleFunction, WeightedStructure,
                     indicator, measure)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_BISECT = 200


@dataclass
class NormResult:
    value: float
    method: str
    residual: Optional[float]
    iterations: int

    def __float__(self) -> float:
        return self.value


@dataclass
class _Terms:
    """Flattened (value, weight) arrays plus the family-tail closure."""
    values: np.ndarray
    weights: np.ndarray
    tail: Optional[Callable]  # (scale, phi) -> upper bound on the remainder
    tail_infinite: bool       # remainder is +inf for any scale > 0

    @property
    def has_tail(self) -> bool:
        return self.tail is not None


def _gather_terms(f: SimpleFunction, weight: Optional[WeightedStructure]) -> _Terms:
    space = f.space
    if weight is not None and weight.space != space:
        raise DomainError("weight structure belongs to a different space")

    vals = [f.atom_values]
    if weight is None:
        wts = [space.atom_masses_float()]
    else:
        wts = [space.atom_masses_float() * weight.atom_omega_float()]

    if space.n_cells:
        cm = float(space.cell_mass)
        if weight is None:
            runs = f.cell_runs
            lengths = runs.lengths().astype(np.float64)
            vals.append(runs.values)
            wts.append(lengths * cm)
        else:
            edges, fv, wv = aligned(f.cell_runs, weight.cell_omega_runs())
            vals.append(fv)
            wts.append(np.diff(edges).astype(np.float64) * cm * wv)

    tail = None
    tail_infinite = False
    fam = space.family
    if fam is not None and not f.family.is_zero:
        n_tr = fam.truncation
        head = f.family.support.intersect(IntervalSet.span(1, n_tr + 1))
        if not head.is_empty:
            idx = np.fromiter(head.elements(), dtype=np.int64)
            fv = np.array([f.family.value(int(i)) for i in idx])
            mv = np.array([float(fam.mass_rule.mass(int(i))) for i in idx])
            if weight is None:
                ww = mv
            else:
                ww = mv * np.array([float(weight.family_omega(int(i))) for i in idx])
            vals.append(fv)
            wts.append(ww)
        tail_set = f.family.support.intersect(IntervalSet.tail(n_tr + 1))
        if not tail_set.is_empty:
            tail, tail_infinite = _family_tail(f, weight, tail_set)

    return _Terms(np.concatenate(vals), np.concatenate(wts), tail, tail_infinite)


def _family_tail(f: SimpleFunction, weight: Optional[WeightedStructure],
                 tail_set) -> tuple:
    """Closure bounding sum_{i in tail} phi(scale*|u_i|) * omega_i * m_i from
    above, and whether it is infinite for every positive scale."""
    space = f.space
    rule = f.family.rule
    mass_rule = space.family.mass_rule
    n_tr = space.family.truncation
    a0 = tail_set.min_element()
    omega_sup = 1.0 if weight is None else weight.family_omega_sup_tail(n_tr)

    tail_mass = mass_rule.interval_mass(tail_set)
    if tail_mass is not math.inf:
        mass_f = float(tail_mass) * omega_sup
        sup_val = rule.sup_abs_over(tail_set)

        def bound(scale: float, phi: OrliczFunction) -> float:
            return evaluate(phi, scale * sup_val) * mass_f if sup_val else 0.0

        return bound, False

    # infinite tail mass: constant mass rule over an unbounded support
    m = float(mass_rule.m) * omega_sup
    if rule.kind == "constant":
        if rule.c == 0.0:
            return (lambda scale, phi: 0.0), False
        return (lambda scale, phi: math.inf), True
    if rule.kind == "geometric":
        c, rho = abs(rule.c), rule.rho

        def bound(scale: float, phi: OrliczFunction) -> float:
            # phi(lambda x) <= lambda phi(x) for lambda <= 1 closes the series
            return m * evaluate(phi, scale * c * rho ** (a0 - 1)) / (1.0 - rho)

        return bound, False
    c = abs(rule.c)

    def bound(scale: float, phi: OrliczFunction) -> float:
        if c == 0.0 or scale == 0.0:
            return 0.0
        val, err = quad(lambda t: evaluate(phi, scale * c / t), a0 - 1, np.inf)
        return m * (val + err)

    return bound, False


def is_weighted_zero(f: SimpleFunction, weight: Optional[WeightedStructure] = None) -> bool:
    """True when f vanishes on every piece of positive (omega *) mu mass."""
    if weight is None:
        return f.is_zero()
    from .spaces import ess_sup
    return ess_sup(f, weight) == 0.0


def modular(f: SimpleFunction, phi: OrliczFunction,
            weight: Optional[WeightedStructure] = None, scale: float = 1.0) -> float:
    """I(scale * f), conservatively including the family tail bound.

    Returns math.inf when the value overflows or the tail diverges.
    """
    terms = _gather_terms(f, weight)
    return _modular_from_terms(terms, phi, scale)


def _modular_from_terms(terms: _Terms, phi: OrliczFunction, scale: float) -> float:
    kind, p, c, kx, ky = phi.kernel_args
    main = _kernels.weighted_modular(kind, p, c, kx, ky, terms.values,
                                     terms.weights, scale)
    if terms.tail_infinite:
        return math.inf
    if terms.has_tail:
        main += terms.tail(scale, phi)
    return main


def luxemburg_norm(f: SimpleFunction, phi: OrliczFunction,
                   weight: Optional[WeightedStructure] = None,
                   tol: float = 1e-10) -> NormResult:
    """inf{k > 0 : I(f/k) <= 1} by bisection on the monotone map k -> I(f/k).

    Zero functions short-circuit to 0; a modular that is infinite for every k
    (infinite-mass family support with non-decaying values) raises
    NotInSpaceError.
    """
    if is_weighted_zero(f, weight):
        return NormResult(0.0, "bisection", None, 0)
    terms = _gather_terms(f, weight)
    if terms.tail_infinite:
        raise NotInSpaceError("the modular is infinite for every scaling")
    kind, p, c, kx, ky = phi.kernel_args
    if not terms.has_tail:
        k, residual, iters = _kernels.luxemburg_root(
            kind, p, c, kx, ky, terms.values, terms.weights, tol, _MAX_BISECT)
        return NormResult(float(k), "bisection", float(residual), int(iters))

    def mod(k: float) -> float:
        return _modular_from_terms(terms, phi, 1.0 / k)

    mask = terms.weights != 0.0
    k = max(float(np.abs(terms.values[mask]).max()), 1e-300)
    it = 0
    if mod(k) > 1.0:
        lo, hi = k, 2.0 * k
        while mod(hi) > 1.0:
            lo, hi = hi, hi * 2.0
            it += 1
            if it > 4200:
                raise ComputationError("luxemburg bracket expansion failed")
    else:
        hi, lo = k, 0.5 * k
        while mod(lo) <= 1.0:
            hi, lo = lo, lo * 0.5
            it += 1
            if it > 4200:
                raise ComputationError("luxemburg bracket shrink failed")
    n = 0
    while n < _MAX_BISECT and (hi - lo) > tol * hi:
        mid = 0.5 * (lo + hi)
        if mod(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        n += 1
    k = 0.5 * (lo + hi)
    return NormResult(k, "bisection", mod(k) - 1.0, it + n)


def amemiya_norm(f: SimpleFunction, phi: OrliczFunction,
                 weight: Optional[WeightedStructure] = None,
                 tol: float = 1e-9, verify: bool = False) -> NormResult:
    """inf_{k>0} (1 + I(k f)) / k by golden-section search on a sampled
    unimodal bracket; `verify` re-checks against a dense 1024-point log scan."""
    if is_weighted_zero(f, weight):
        return NormResult(0.0, "minimization", None, 0)
    terms = _gather_terms(f, weight)
    if terms.tail_infinite:
        raise NotInSpaceError("the modular is infinite for every scaling")

    def g(k: float) -> float:
        return (1.0 + _modular_from_terms(terms, phi, k)) / k

    # sample on a log grid until g rises on both sides of its minimum
    j_min, g_min = 0, g(1.0)
    lo_exp, hi_exp = 0, 0
    while True:
        moved = False
        if j_min == lo_exp:
            lo_exp -= 1
            val = g(2.0 ** lo_exp)
            if val < g_min:
                j_min, g_min = lo_exp, val
            moved = True
        if j_min == hi_exp:
            hi_exp += 1
            val = g(2.0 ** hi_exp)
            if val < g_min:
                j_min, g_min = hi_exp, val
            moved = True
        if not moved or hi_exp - lo_exp > 2400:
            break
    if hi_exp - lo_exp > 2400:
        raise ComputationError("amemiya bracket search failed")
    lo, hi = 2.0 ** (j_min - 1), 2.0 ** (j_min + 1)
    a = hi - _GOLDEN * (hi - lo)
    b = lo + _GOLDEN * (hi - lo)
    ga, gb = g(a), g(b)
    iters = 0
    while (hi - lo) > tol * hi and iters < 400:
        if ga < gb:
            hi, b, gb = b, a, ga
            a = hi - _GOLDEN * (hi - lo)
            ga = g(a)
        else:
            lo, a, ga = a, b, gb
            b = lo + _GOLDEN * (hi - lo)
            gb = g(b)
        iters += 1
    k_star = 0.5 * (lo + hi)
    value = min(ga, gb, g(k_star))
    if verify:
        ks = np.logspace(math.log10(k_star) - 3, math.log10(k_star) + 3, 1024)
        dense = min(g(float(k)) for k in ks)
        if dense < value - 1e-6 * max(1.0, value):
            raise ComputationError(
                f"golden-section minimum {value} beaten by dense scan {dense}")
    return NormResult(value, "minimization", None, iters)


def indicator_norm(piece_set: PieceSet, phi: OrliczFunction,
                   cross_check: bool = False, tol: float = 1e-10) -> NormResult:
    """Closed form ||chi_A|| = 1 / phi^{-1}(1/mu(A)) for 0 < mu(A) < inf."""
    mu = measure(piece_set.space, piece_set)
    if mu is math.inf or not (0 < mu):
        raise DomainError("indicator norm needs 0 < mu(A) < inf")
    value = 1.0 / right_inverse(phi, 1.0 / float(mu))
    if cross_check:
        bis = luxemburg_norm(indicator(piece_set), phi, tol=tol)
        if abs(bis.value - value) > 10 * tol * max(1.0, value):
            raise ComputationError(
                f"indicator norm closed form {value} != bisection {bis.value}")
    return NormResult(value, "closed_form", None, 0)


def weighted_indicator_norm(piece_set: PieceSet, phi: OrliczFunction,
                            weight: WeightedStructure,
                            cross_check: bool = False, tol: float = 1e-10) -> NormResult:
    """||chi_F|| in the weighted space: 1 / phi^{-1}(1 / mu(tau^{-1}F)).

    When mu(tau^{-1}F) = 0 the weight vanishes on F and the norm is 0
    (reported, not an error).
    """
    mu = weight.pushforward_measure(piece_set)
    if mu == 0:
        return NormResult(0.0, "closed_form", None, 0)
    if mu is math.inf:
        raise DomainError("weighted indicator norm needs mu(tau^{-1}F) < inf")
    value = 1.0 / right_inverse(phi, 1.0 / float(mu))
    if cross_check:
        bis = luxemburg_norm(indicator(piece_set), phi, weight=weight, tol=tol)
        if abs(bis.value - value) > 10 * tol * max(1.0, value):
            raise ComputationError(
                f"weighted indicator norm closed form {value} != bisection {bis.value}")
    return NormResult(value, "closed_form", None, 0)


def modular_at_norm(f: SimpleFunction, phi: OrliczFunction,
                    weight: Optional[WeightedStructure] = None,
                    tol: float = 1e-10) -> float:
    """The (weighted) modular evaluated at the computed Luxemburg norm.

    Equals 1 within 10*tol when phi satisfies the doubling condition; without
    it the infimum need not be attained at modular 1, so a warning is emitted
    and the observed value returned.
    """
    if is_weighted_zero(f, weight):
        raise DomainError("modular_at_norm needs a function that is nonzero "
                          "on positive-weight pieces")
    if check_delta2(phi).verdict != DELTA2_HOLDS:
        warnings.warn("phi fails the doubling condition: modular at the norm "
                      "may be below 1", stacklevel=2)
    nr = luxemburg_norm(f, phi, weight=weight, tol=tol)
    return modular(f, phi, weight=weight, scale=1.0 / nr.value)
