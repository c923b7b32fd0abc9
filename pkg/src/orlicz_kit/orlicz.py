"""Young (Orlicz) functions: evaluation, inverses, conjugates, growth checks.

A Young function is a continuous convex phi:[0,inf)->[0,inf) with phi(0)=0,
phi(x)>0 for x>0, phi(x)/x -> 0 at 0 and -> inf at infinity.  Four families
are supported:

* ``power``      phi(x) = c * x**p           (p > 1, c > 0)
* ``exp_minus``  phi(x) = exp(x) - x - 1
* ``power_log``  phi(x) = x**p * log(1 + x)  (p >= 1)
* ``tabulated``  convex piecewise-linear interpolant through increasing knots
                 anchored at (0, 0), extended past the last knot with the
                 final slope

Closed-form families satisfy the growth axioms identically; tabulated
functions are validated on their knot span (a finite table cannot witness
asymptotics, which is also why the superlinearity test is a sampled flag).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ComputationError, ConfigError, DomainError, UnboundedConjugateError

_FAMILY_CODES = {
    "power": _kernels.POWER,
    "exp_minus": _kernels.EXP_MINUS,
    "power_log": _kernels.POWER_LOG,
    "tabulated": _kernels.TABULATED,
}

DELTA2_HOLDS = "holds"
DELTA2_FAILS = "fails"
DELTA2_UNKNOWN = "unknown"

_CONVEXITY_TOL = 1e-9


@dataclass(frozen=True)
class OrliczFunction:
    family: str
    p: float = 0.0
    c: float = 1.0
    knots: tuple = ()

    def __post_init__(self):
        if self.family == "power":
            if not (self.p > 1.0):
                raise ConfigError(f"power family needs p > 1, got p={self.p}")
            if not (self.c > 0.0):
                raise ConfigError(f"power family needs c > 0, got c={self.c}")
        elif self.family == "exp_minus":
            pass
        elif self.family == "power_log":
            if not (self.p >= 1.0):
                raise ConfigError(f"power_log family needs p >= 1, got p={self.p}")
        elif self.family == "tabulated":
            object.__setattr__(self, "knots", _audit_knots(self.knots))
        else:
            raise ConfigError(f"unknown Orlicz family {self.family!r}")

    # -- constructors -------------------------------------------------
    @classmethod
    def power(cls, p: float, c: float = 1.0) -> "OrliczFunction":
        return cls("power", p=float(p), c=float(c))

    @classmethod
    def exp_minus(cls) -> "OrliczFunction":
        return cls("exp_minus")

    @classmethod
    def power_log(cls, p: float) -> "OrliczFunction":
        return cls("power_log", p=float(p))

    @classmethod
    def tabulated(cls, knots) -> "OrliczFunction":
        return cls("tabulated", knots=tuple((float(x), float(y)) for x, y in knots))

    # -- kernel plumbing ----------------------------------------------
    @property
    def kernel_args(self):
        kx, ky = self.knot_arrays
        return _FAMILY_CODES[self.family], self.p, self.c, kx, ky

    @property
    def knot_arrays(self):
        if self.family != "tabulated":
            return None, None
        arr = np.asarray(self.knots, dtype=np.float64)
        return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])

    # -- metadata flags ------------------------------------------------
    @property
    def delta2(self) -> str:
        return check_delta2(self).verdict

    @property
    def delta2_constant(self) -> float:
        return check_delta2(self).k_estimate

    @property
    def superlinear(self) -> bool:
        return check_superlinear(self)

    # -- descriptors ----------------------------------------------------
    def to_descriptor(self) -> dict:
        if self.family == "power":
            return {"family": "power", "p": self.p, "c": self.c}
        if self.family == "exp_minus":
            return {"family": "exp_minus"}
        if self.family == "power_log":
            return {"family": "power_log", "p": self.p}
        return {"family": "tabulated", "knots": [[x, y] for x, y in self.knots]}

    @classmethod
    def from_descriptor(cls, desc: dict) -> "OrliczFunction":
        if not isinstance(desc, dict) or "family" not in desc:
            raise ConfigError("Orlicz descriptor must be an object with a 'family' field")
        fam = desc["family"]
        try:
            if fam == "power":
                return cls.power(desc["p"], desc.get("c", 1.0))
            if fam == "exp_minus":
                return cls.exp_minus()
            if fam == "power_log":
                return cls.power_log(desc["p"])
            if fam == "tabulated":
                return cls.tabulated(desc["knots"])
        except KeyError as exc:
            raise ConfigError(f"Orlicz descriptor missing field {exc}") from None
        raise ConfigError(f"unknown Orlicz family {fam!r}")


def _audit_knots(knots) -> tuple:
    """Anchor at (0,0), require strictly increasing pairs and convex slopes."""
    pts = [(float(x), float(y)) for x, y in knots]
    if not pts:
        raise ConfigError("tabulated family needs at least one knot")
    if pts[0] != (0.0, 0.0):
        if pts[0][0] <= 0.0:
            raise ConfigError("tabulated knots must start at or after (0, 0)")
        pts.insert(0, (0.0, 0.0))
    if len(pts) < 2:
        raise ConfigError("tabulated family needs a knot beyond the origin")
    slopes = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 <= x0 or y1 <= y0:
            raise ConfigError("tabulated knots must be strictly increasing in x and y")
        slopes.append((y1 - y0) / (x1 - x0))
    scale = max(slopes)
    for s0, s1 in zip(slopes, slopes[1:]):
        if s1 < s0 - _CONVEXITY_TOL * max(1.0, scale):
            raise ConfigError(
                f"tabulated knots fail the convexity audit (slope {s1} after {s0}); "
                "non-convex input is rejected, not repaired")
    return tuple(pts)


# ---------------------------------------------------------------------------
# evaluation / inverse / derivative
# ---------------------------------------------------------------------------

def evaluate(phi: OrliczFunction, x: float) -> float:
    """phi(x) for scalar x >= 0."""
    if x < 0:
        raise DomainError(f"Orlicz functions are defined on [0, inf); got {x}")
    if x == 0.0:
        return 0.0
    kind, p, c, kx, ky = phi.kernel_args
    return float(_kernels.phi_array(kind, p, c, kx, ky, np.array([x]))[0])


def evaluate_array(phi: OrliczFunction, x: np.ndarray) -> np.ndarray:
    kind, p, c, kx, ky = phi.kernel_args
    return _kernels.phi_array(kind, p, c, kx, ky, np.asarray(x, dtype=np.float64))


def derivative(phi: OrliczFunction, x: float) -> float:
    """Right derivative of phi at x >= 0."""
    if x < 0:
        raise DomainError("derivative domain is [0, inf)")
    if phi.family == "power":
        return phi.c * phi.p * x ** (phi.p - 1.0)
    if phi.family == "exp_minus":
        return math.expm1(x)
    if phi.family == "power_log":
        if x == 0.0:
            return 0.0
        return phi.p * x ** (phi.p - 1.0) * math.log1p(x) + x ** phi.p / (1.0 + x)
    kx, ky = phi.knot_arrays
    j = int(np.searchsorted(kx, x, side="right")) - 1
    j = min(max(j, 0), len(kx) - 2)
    return float((ky[j + 1] - ky[j]) / (kx[j + 1] - kx[j]))


def right_inverse(phi: OrliczFunction, t: float, tol: float = 1e-12) -> float:
    """inf{s > 0 : phi(s) > t}; equals the ordinary inverse for strictly
    increasing phi.  Closed form for the power family, otherwise bracketed
    bisection (monotonicity makes it unconditionally convergent)."""
    if t < 0:
        raise DomainError(f"right_inverse needs t >= 0, got {t}")
    if t == 0.0:
        return 0.0
    if phi.family == "power":
        return (t / phi.c) ** (1.0 / phi.p)
    hi = 1.0
    guard = 0
    while evaluate(phi, hi) <= t:
        hi *= 2.0
        guard += 1
        if guard > 1100:
            raise ComputationError("right_inverse bracket expansion failed")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid == lo or mid == hi:
            break
        if evaluate(phi, mid) > t:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Young conjugate
# ---------------------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def conjugate_value(phi: OrliczFunction, y: float,
                    x_cap: float = 1e9, tol: float = 1e-11) -> float:
    """psi(y) = sup_{x >= 0} (x*y - phi(x)) by bracketed concave maximization.

    The bracket [0, hi] expands until the objective's derivative y - phi'(x)
    turns negative; exceeding x_cap means the supremum is infinite.
    """
    if y < 0:
        raise DomainError("conjugate argument must be nonnegative")
    if y == 0.0:
        return 0.0
    hi = 1.0
    while derivative(phi, hi) <= y:
        hi *= 2.0
        if hi > x_cap:
            raise UnboundedConjugateError(
                f"conjugate is +inf at y={y}: bracket exceeded {x_cap}")

    def g(x):
        return x * y - evaluate(phi, x)

    lo = 0.0
    a = hi - _GOLDEN * (hi - lo)
    b = lo + _GOLDEN * (hi - lo)
    ga, gb = g(a), g(b)
    while hi - lo > tol * max(1.0, hi):
        if ga < gb:
            lo = a
            a, ga = b, gb
            b = lo + _GOLDEN * (hi - lo)
            gb = g(b)
        else:
            hi = b
            b, gb = a, ga
            a = hi - _GOLDEN * (hi - lo)
            ga = g(a)
    best = max(ga, gb, g(0.5 * (lo + hi)), 0.0)
    return best


def conjugate(phi: OrliczFunction, y_max: Optional[float] = None,
              n_knots: int = 513) -> OrliczFunction:
    """Complementary Young function psi(y) = sup_x (x*y - phi(x)).

    Power conjugates are exact: (c*x**p)* = c' * y**q with q = p/(p-1) and
    c' = (p-1) * p**(-q) * c**(1-q).  Other families are tabulated from the
    pointwise maximization; the chord interpolant of a convex function lies
    above it, so Young's inequality survives tabulation.
    """
    if phi.family == "power":
        q = phi.p / (phi.p - 1.0)
        c_star = (phi.p - 1.0) * phi.p ** (-q) * phi.c ** (1.0 - q)
        return OrliczFunction.power(q, c_star)
    if phi.family == "tabulated":
        # the conjugate vanishes below the initial slope and is +inf beyond
        # the final one; tabulate the strictly increasing stretch in between
        # (the chord from the origin overestimates the flat part, which keeps
        # Young's inequality intact)
        kx, ky = phi.knot_arrays
        slopes = np.diff(ky) / np.diff(kx)
        if y_max is None:
            y_max = min(100.0, float(slopes[-1]) * (1.0 - 1e-9))
        y_floor = float(slopes[0]) * (1.0 + 1e-6)
        if y_max <= y_floor:
            raise DomainError(
                "the conjugate of a single-slope tabulated function is "
                "degenerate (zero below the slope, infinite above)")
        ys = np.concatenate([np.linspace(y_floor, y_max, n_knots - 1)])
    else:
        if y_max is None:
            y_max = 100.0
        ys = np.linspace(0.0, y_max, n_knots)[1:]
    knots = [(0.0, 0.0)]
    for y in ys:
        knots.append((float(y), conjugate_value(phi, float(y))))
    return OrliczFunction.tabulated(knots)


# ---------------------------------------------------------------------------
# growth conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta2Report:
    verdict: str
    k_estimate: float
    counterexample_x: Optional[float]
    probe_lo: float
    probe_hi: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "k_estimate": self.k_estimate,
            "counterexample_x": self.counterexample_x,
            "probe_lo": self.probe_lo,
            "probe_hi": self.probe_hi,
            "n_points": self.n_points,
        }


@functools.lru_cache(maxsize=256)
def check_delta2(phi: OrliczFunction, x_lo: float = 1e-6, x_hi: float = 1e6,
                 n_points: int = 400) -> Delta2Report:
    """Probe r(x) = phi(2x)/phi(x) on a log grid.

    Verdict ``holds`` iff every ratio is finite, the ratio spread stays within
    a factor 1e6 (scale-free boundedness detector), and the ratio trend over
    the top probed decade is non-increasing.  K is the largest ratio seen;
    the probe range is carried in the report because a grid cannot certify
    "for all x".
    """
    xs = np.logspace(math.log10(x_lo), math.log10(x_hi), n_points)
    num = evaluate_array(phi, 2.0 * xs)
    den = evaluate_array(phi, xs)
    with np.errstate(invalid="ignore"):
        ratios = num / den
    finite = np.isfinite(ratios)
    k_est = float(ratios[finite].max()) if finite.any() else math.inf
    r_min = float(ratios[finite].min()) if finite.any() else math.inf

    counterexample = None
    if not finite.all():
        counterexample = float(xs[np.flatnonzero(~finite)[0]])
    elif k_est > 1e6 * r_min:
        counterexample = float(xs[np.flatnonzero(ratios > 1e6 * r_min)[0]])
    else:
        top = xs >= x_hi / 10.0
        slope = float(np.polyfit(np.log10(xs[top]), ratios[top], 1)[0])
        if slope > 1e-6 * max(1.0, k_est):
            counterexample = float(xs[top][-1])

    verdict = DELTA2_FAILS if counterexample is not None else DELTA2_HOLDS
    return Delta2Report(verdict, k_est, counterexample,
                        float(x_lo), float(x_hi), n_points)


@functools.lru_cache(maxsize=256)
def check_superlinear(phi: OrliczFunction) -> bool:
    """Sampled test of phi^{-1}(t)/t -> 0: strictly decreasing over t = 10^k,
    k = 1..8, with the final sample below 1e-2."""
    ratios = [right_inverse(phi, 10.0 ** k) / 10.0 ** k for k in range(1, 9)]
    decreasing = all(a > b for a, b in zip(ratios, ratios[1:]))
    return decreasing and ratios[-1] < 1e-2


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(phi: OrliczFunction, tol: float = 1e-9) -> None:
    """Grid audit of the Young-function axioms.

    Positivity, monotonicity and midpoint convexity are checked on a log grid
    (clipped to the knot span for tabulated functions); the vanishing /
    diverging phi(x)/x growth ratios are additionally checked for the
    closed-form families where the asymptotics are meaningful.  Raises
    ConfigError on violation.
    """
    if phi.family == "tabulated":
        hi = phi.knots[-1][0]
        grid = np.linspace(0.0, hi, 257)
    else:
        grid = np.concatenate([[0.0], np.logspace(-8, 6, 281)])
    vals = evaluate_array(phi, grid)
    if vals[0] != 0.0:
        raise ConfigError("phi(0) must be 0")
    if np.any(vals[1:] <= 0.0):
        raise ConfigError("phi must be strictly positive for x > 0")
    with np.errstate(invalid="ignore"):
        if np.any(np.diff(vals) < -tol * np.maximum(1.0, vals[:-1])):
            raise ConfigError("phi must be nondecreasing")
        mid = evaluate_array(phi, 0.5 * (grid[:-1] + grid[1:]))
        chord = 0.5 * (vals[:-1] + vals[1:])
        bad = mid > chord + tol * np.maximum(1.0, np.abs(chord))
    if np.any(bad & np.isfinite(chord)):
        raise ConfigError("phi fails the midpoint convexity audit")
    if phi.family != "tabulated":
        small = np.array([evaluate(phi, 10.0 ** (-k)) * 10.0 ** k for k in range(1, 9)])
        if not (np.all(np.diff(small) < 0) and small[-1] < small[0]):
            raise ConfigError("phi(x)/x must decrease toward 0 as x -> 0")
        with np.errstate(over="ignore"):
            large = np.array([evaluate(phi, 10.0 ** k) / 10.0 ** k for k in range(1, 9)])
        if not np.all(np.diff(large[np.isfinite(large)]) > 0):
            raise ConfigError("phi(x)/x must increase without bound")
