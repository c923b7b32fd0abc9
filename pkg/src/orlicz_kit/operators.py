"""Multiplication operators M_u : f -> u*f on (weighted) Orlicz spaces.

Boundedness and the exact operator norm (the essential supremum of |u|),
geometry of the level sets N(u, eps) = {|u| >= eps}, the compactness /
complete-continuity classification, invertibility, and finite-rank truncation
approximants.  On the model, "the subspace supported on N(u, eps) is finite
dimensional" means: finitely many positive-mass pieces and no nonatomic mass
in N(u, eps) -- piece indicators form a basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, SpaceMismatchError
from .intervals import IntervalSet
from .norms import luxemburg_norm
from .orlicz import DELTA2_HOLDS, OrliczFunction, check_delta2, check_superlinear
from .spaces import (MeasureSpace, PieceSet, SimpleFunction, ValueRule,
                     WeightedStructure, ess_inf_abs, ess_sup, indicator)

JUSTIFY_FINITE = "n_sets_finite_atoms"
JUSTIFY_NONATOMIC = "nonatomic_mass_in_n_set"
JUSTIFY_INFINITE_FAMILY = "infinitely_many_family_atoms"
JUSTIFY_ZERO = "zero_operator"


def apply(u: SimpleFunction, f: SimpleFunction) -> SimpleFunction:
    """Pointwise u*f (the operator applied to f)."""
    return u.mul(f)


def n_set(u: SimpleFunction, eps: float) -> PieceSet:
    """N(u, eps) = pieces where |u| >= eps."""
    if eps <= 0:
        raise DomainError("n_set needs eps > 0")
    return u.threshold_set(eps, strict=False)


@dataclass
class OperatorNormResult:
    value: float                 # ess sup |u| over positive-(omega*mu) pieces
    witness: PieceSet            # E = {|u| >= value - delta}
    delta: float
    mu_ess_sup: float            # unweighted ess sup, recorded for comparison
    seminorm_flag: bool          # weight vanishes wherever the mu-ess-sup lives

    def __iter__(self):
        return iter((self.value, self.witness))


def operator_norm(u: SimpleFunction, weight: Optional[WeightedStructure] = None,
                  delta_rel: float = 1e-6) -> OperatorNormResult:
    """||M_u|| = ess sup |u|, with a near-maximal witness set.

    With a weight, the supremum is taken over pieces of positive omega*mu
    mass (the measure the weighted norm sees); the plain mu-essential
    supremum is recorded alongside, and a flag is raised when they differ
    (the norm is then attained only in the seminorm sense of the weight).
    """
    s = ess_sup(u, weight)
    mu_s = ess_sup(u)
    if s == 0.0:
        return OperatorNormResult(0.0, PieceSet.empty(u.space), 0.0, mu_s, mu_s > 0.0)
    delta = delta_rel * s
    witness = u.threshold_set(s - delta, strict=False)
    if weight is not None:
        # the proof needs the witness to carry positive weighted mass
        for _ in range(80):
            if weight.weighted_measure_sum(witness) > 0:
                break
            delta *= 0.5
            witness = u.threshold_set(s - delta, strict=False)
        witness = _positive_weight_part(witness, weight)
    return OperatorNormResult(s, witness, delta, mu_s, mu_s > s)


def _positive_weight_part(piece_set: PieceSet, weight: WeightedStructure) -> PieceSet:
    null = weight.omega_null_set()
    return piece_set.intersect(null.complement())


@dataclass
class CompactnessReport:
    verdict: str                       # "compact" | "not_compact"
    justification: str
    dim_report: tuple                  # ((eps, dim), ...) dim int or math.inf
    mu_total_finite: bool

    @property
    def compact(self) -> bool:
        return self.verdict == "compact"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "justification": self.justification,
            "dim_report": [[eps, ("inf" if d is math.inf else d)]
                           for eps, d in self.dim_report],
            "mu_total_finite": self.mu_total_finite,
        }


def _dimension_at(u: SimpleFunction, eps: float):
    """Count of positive-mass pieces in N(u, eps); math.inf for nonatomic
    mass or an infinite family predicate."""
    ns = n_set(u, eps)
    if not ns.cells.is_empty:
        return math.inf
    fam = ns.family.count()
    if fam is math.inf:
        return math.inf
    return len(ns.atoms) + fam


def classify_compact(u: SimpleFunction, space: Optional[MeasureSpace] = None,
                     phi: Optional[OrliczFunction] = None,
                     eps_list: Optional[list] = None) -> CompactnessReport:
    """Compact iff every N(u, eps) carries zero nonatomic measure and only
    finitely many family atoms; decided exactly from the value rules."""
    if space is not None and space != u.space:
        raise SpaceMismatchError("u lives on a different space")
    space = u.space
    if eps_list is None:
        eps_list = [2.0 ** (-k) for k in range(0, 21)]
    dims = tuple((float(eps), _dimension_at(u, eps)) for eps in eps_list)
    total = space.total_measure()
    mu_finite = total is not math.inf

    if u.is_zero():
        return CompactnessReport("compact", JUSTIFY_ZERO, dims, mu_finite)
    if u.cell_runs.max_abs() > 0.0:
        return CompactnessReport("not_compact", JUSTIFY_NONATOMIC, dims, mu_finite)
    fam = u.family
    if not fam.is_zero and fam.rule.kind == "constant" and not fam.support.is_finite:
        return CompactnessReport("not_compact", JUSTIFY_INFINITE_FAMILY, dims, mu_finite)
    # decaying rules (harmonic/geometric) or finite support: every N(u, eps)
    # meets finitely many family atoms
    return CompactnessReport("compact", JUSTIFY_FINITE, dims, mu_finite)


@dataclass
class InvertibilityResult:
    invertible: bool
    ess_inf_abs: float
    inverse: Optional[SimpleFunction]
    mu_total_finite: bool
    delta2_verdict: str

    def __iter__(self):
        return iter((self.invertible, self.ess_inf_abs))


def check_invertible(u: SimpleFunction, phi: Optional[OrliczFunction] = None,
                     tol_inv: float = 1e-12) -> InvertibilityResult:
    """Invertible iff |u| is essentially bounded away from zero.

    The theorem characterizing this needs mu(Omega) < inf and the doubling
    condition; both are recorded so hypothesis mismatches stay visible.
    """
    bound = ess_inf_abs(u)
    total = u.space.total_measure()
    d2 = check_delta2(phi).verdict if phi is not None else "unknown"
    invertible = bound > tol_inv
    inverse = None
    if invertible:
        fam = u.family
        inv_fam = fam
        if not fam.is_zero:
            # only constant family rules stay bounded after inversion, and a
            # decaying rule would have flunked the ess-inf test already
            inv_fam = _invert_family(fam)
        inverse = SimpleFunction(
            u.space,
            np.where(u.atom_values != 0.0, 1.0 / u.atom_values, 0.0),
            u.cell_runs.map(lambda v: np.where(v != 0.0, 1.0 / v, 0.0)),
            inv_fam,
        )
    return InvertibilityResult(invertible, bound, inverse,
                               total is not math.inf, d2)


def _invert_family(fam):
    from .spaces import FamilyValues
    if fam.rule.kind != "constant":
        raise DomainError("only constant family rules invert boundedly")
    return FamilyValues(ValueRule("constant", 1.0 / fam.rule.c), fam.support)


def truncation(u: SimpleFunction, n: int) -> SimpleFunction:
    """u_n = u * chi_{|u| > 1/n}: u where |u| exceeds 1/n, zero elsewhere."""
    if n < 1:
        raise DomainError("truncation needs n >= 1")
    return u.restrict(u.threshold_set(1.0 / n, strict=True))


def default_probes(space: MeasureSpace, rng: np.random.Generator,
                   count: int = 100) -> list:
    """Indicators of every single piece plus seeded random simple functions."""
    probes = []
    for aid in space.atom_ids:
        probes.append(indicator(PieceSet(space, frozenset([aid]))))
    if space.segment:
        n = space.n_cells
        step = max(1, n // 8)
        for a in range(0, n, step):
            probes.append(indicator(PieceSet(space, cells=IntervalSet.span(a, min(a + step, n)))))
    if space.family:
        for i in (1, 2, 3):
            probes.append(indicator(PieceSet(space, family=IntervalSet.span(i, i + 1))))
    for _ in range(count):
        probes.append(random_simple_function(space, rng))
    return probes


def random_simple_function(space: MeasureSpace, rng: np.random.Generator,
                           lo: float = -3.0, hi: float = 3.0,
                           family_kinds: tuple = ("zero",)) -> SimpleFunction:
    from .runs import Runs
    from .spaces import FamilyValues, ZERO_FAMILY
    atom_values = rng.uniform(lo, hi, size=len(space.atoms))
    runs = Runs.constant(space.n_cells, 0.0)
    if space.segment:
        n = space.n_cells
        k = min(int(rng.integers(1, 9)), n)
        edges = np.unique(np.concatenate([[0, n], rng.integers(1, n, size=k - 1)])) if n > 1 else np.array([0, n])
        vals = rng.uniform(lo, hi, size=len(edges) - 1)
        runs = Runs(edges, vals)
    fam = ZERO_FAMILY
    if space.family:
        kind = family_kinds[int(rng.integers(0, len(family_kinds)))]
        if kind == "harmonic":
            fam = FamilyValues(ValueRule("harmonic", float(rng.uniform(lo, hi))),
                               IntervalSet.tail(1))
        elif kind == "geometric":
            fam = FamilyValues(ValueRule("geometric", float(rng.uniform(lo, hi)),
                                         rho=float(rng.uniform(0.2, 0.8))),
                               IntervalSet.tail(1))
        elif kind == "constant":
            fam = FamilyValues(ValueRule("constant", float(rng.uniform(lo, hi))),
                               IntervalSet.tail(1))
    return SimpleFunction(space, atom_values, runs, fam)


def truncation_gap(u: SimpleFunction, n: int, phi: OrliczFunction,
                   weight: Optional[WeightedStructure] = None,
                   probes: Optional[list] = None, seed: int = 0) -> float:
    """max over probes of ||(u_n - u) f|| / ||f||; bounded by 1/n since
    |u_n - u| <= 1/n everywhere."""
    u_n = truncation(u, n)
    diff = u_n.sub(u)
    if probes is None:
        probes = default_probes(u.space, np.random.default_rng(seed))
    worst = 0.0
    for f in probes:
        denom = luxemburg_norm(f, phi, weight=weight)
        if denom.value == 0.0:
            continue
        num = luxemburg_norm(apply(diff, f), phi, weight=weight)
        worst = max(worst, num.value / denom.value)
    return worst


def _rational_values(f: SimpleFunction):
    """Per-piece values as exact rationals (family: first truncation indices)."""
    out = [Fraction(float(v)) for v in f.atom_values]
    for _, _, v in f.cell_runs.segments():
        out.append(Fraction(v))
    n = f.space.family.truncation if f.space.family else 0
    for i in range(1, n + 1):
        out.append(Fraction(f.family.value(i)))
    return out


def commute_check(u: SimpleFunction, v: SimpleFunction, probes: list) -> bool:
    """M_u M_v = M_v M_u = M_{uv} on every probe, verified piece by piece in
    exact rational arithmetic (float products commute but do not associate,
    so the identity is checked on the exact products of the stored values).
    Also checks the reconstruction T(chi_E) = M_{T(e)}(chi_E) for T = M_v."""
    for f in probes:
        fu = _rational_values(f)
        uu = _rational_values(u)
        vv = _rational_values(v)
        for a, b, c in zip(uu, vv, fu):
            if a * (b * c) != b * (a * c) or a * (b * c) != (a * b) * c:
                return False
    # T = M_v acting on the unit function recovers the symbol v
    e = indicator(PieceSet.whole(u.space))
    v_of_e = apply(v, e)
    for f in probes:
        chi = indicator(f.support())
        lhs = _rational_values(apply(v, chi))
        rhs = _rational_values(apply(v_of_e, chi))
        if lhs != rhs:
            return False
    return True


@dataclass
class OperatorReport:
    bounded: bool
    operator_norm: float
    norm_witness: dict
    mu_ess_sup: float
    seminorm_flag: bool
    compact: str
    justification: str
    completely_continuous: str
    invertible: bool
    ess_inf_abs: float
    dim_report: tuple
    mu_total_finite: bool
    delta2_verdict: str
    superlinear: bool
    notes: tuple = ()

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "bounded": self.bounded,
            "operator_norm": self.operator_norm,
            "norm_witness": self.norm_witness,
            "mu_ess_sup": self.mu_ess_sup,
            "seminorm_flag": self.seminorm_flag,
            "compact": self.compact,
            "justification": self.justification,
            "completely_continuous": self.completely_continuous,
            "invertible": self.invertible,
            "ess_inf_abs": self.ess_inf_abs,
            "dim_report": [[eps, ("inf" if d is math.inf else d)]
                           for eps, d in self.dim_report],
            "mu_total_finite": self.mu_total_finite,
            "delta2": self.delta2_verdict,
            "superlinear": self.superlinear,
            "notes": list(self.notes),
        }


def analyze(u: SimpleFunction, phi: OrliczFunction,
            weight: Optional[WeightedStructure] = None,
            eps_list: Optional[list] = None) -> OperatorReport:
    """Full operator report for M_u."""
    norm = operator_norm(u, weight)
    comp = classify_compact(u, phi=phi, eps_list=eps_list)
    inv = check_invertible(u, phi)
    d2 = check_delta2(phi).verdict
    sl = check_superlinear(phi)
    if d2 == DELTA2_HOLDS and sl:
        cc = comp.verdict
    else:
        cc = f"conditional({comp.verdict})"
    notes = []
    if not comp.mu_total_finite:
        notes.append("mu(Omega) is infinite: the finite-measure hypotheses "
                     "of the compactness and invertibility characterizations fail")
    if d2 != DELTA2_HOLDS:
        notes.append("phi fails the doubling condition")
    if not sl:
        notes.append("phi is not superlinear at the sampled range")
    if norm.seminorm_flag:
        notes.append("mu-ess-sup exceeds the weighted ess-sup: the norm is "
                     "attained only up to the weight's null set")
    return OperatorReport(
        bounded=True,
        operator_norm=norm.value,
        norm_witness=norm.witness.to_descriptor(),
        mu_ess_sup=norm.mu_ess_sup,
        seminorm_flag=norm.seminorm_flag,
        compact=comp.verdict,
        justification=comp.justification,
        completely_continuous=cc,
        invertible=inv.invertible,
        ess_inf_abs=inv.ess_inf_abs,
        dim_report=comp.dim_report,
        mu_total_finite=comp.mu_total_finite,
        delta2_verdict=d2,
        superlinear=sl,
        notes=tuple(notes),
    )
