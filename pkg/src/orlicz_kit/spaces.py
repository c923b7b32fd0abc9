"""Desk-scale sigma-finite measure spaces.

A space has three parts, any of which may be absent:

* finitely many explicit atoms (id, mass),
* a nonatomic segment of given length modeled as 2**depth dyadic cells
  (measurable subsets of the segment are unions of cells),
* a countable atom family given symbolically by a mass rule, so that the
  infinite-atom dichotomies stay decidable while numerics use a truncation.

Masses are exact rationals internally: additivity, preimage measures and the
Radon-Nikodym identity then hold exactly, not merely to rounding.  Power-law
family masses are the one exception (their partial sums go through the
Hurwitz zeta function and come back as floats).

Everything here is immutable by convention; depth refinement returns a new
space and piece-sets/functions lift onto it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .errors import ConfigError, DomainError, SpaceMismatchError, UnsupportedRuleError
from .intervals import IntervalSet
from .runs import Runs, aligned

MAX_DEPTH = 24
_EXACT_POW_CAP = 512  # largest exponent for exact rational r**k


def _as_fraction(value, what: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None


# ---------------------------------------------------------------------------
# countable atom family: mass rules and value rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassRule:
    """m_i for i = 1, 2, ...: constant m, geometric m*r**(i-1), or m*i**(-s)."""
    kind: str
    m: Fraction
    r: Optional[Fraction] = None
    s: Optional[float] = None

    def __post_init__(self):
        if self.m <= 0:
            raise ConfigError("family masses must be positive")
        if self.kind == "geometric" and not (0 < self.r < 1):
            raise ConfigError("geometric mass rule needs 0 < r < 1")
        if self.kind == "power" and not (self.s > 1):
            raise ConfigError("power mass rule needs s > 1")
        if self.kind not in ("constant", "geometric", "power"):
            raise ConfigError(f"unknown mass rule {self.kind!r}")

    def mass(self, i: int):
        if self.kind == "constant":
            return self.m
        if self.kind == "geometric":
            if i - 1 <= _EXACT_POW_CAP:
                return self.m * self.r ** (i - 1)
            return float(self.m) * float(self.r) ** (i - 1)
        return float(self.m) * float(i) ** (-self.s)

    def prefix_mass(self, k: int):
        """Total mass of indices 1..k."""
        if k <= 0:
            return Fraction(0)
        if self.kind == "constant":
            return self.m * k
        if self.kind == "geometric":
            if k <= _EXACT_POW_CAP:
                return self.m * (1 - self.r ** k) / (1 - self.r)
            return float(self.total_mass()) - float(self.m) * float(self.r) ** k / (1.0 - float(self.r))
        zs = float(_hurwitz_zeta(self.s, 1)) - float(_hurwitz_zeta(self.s, k + 1))
        return float(self.m) * zs

    def total_mass(self):
        if self.kind == "constant":
            return math.inf
        if self.kind == "geometric":
            return self.m / (1 - self.r)
        return float(self.m) * float(_hurwitz_zeta(self.s, 1))

    def interval_mass(self, cells: IntervalSet):
        total = Fraction(0)
        for a, b in cells.intervals:
            if b is None:
                whole = self.total_mass()
                if whole is math.inf:
                    return math.inf
                total = total + whole - self.prefix_mass(a - 1)
            else:
                total = total + self.prefix_mass(b - 1) - self.prefix_mass(a - 1)
        return total

    def masses_upto(self, n: int) -> np.ndarray:
        i = np.arange(1, n + 1, dtype=np.float64)
        if self.kind == "constant":
            return np.full(n, float(self.m))
        if self.kind == "geometric":
            return float(self.m) * float(self.r) ** (i - 1.0)
        return float(self.m) * i ** (-self.s)

    def to_descriptor(self) -> dict:
        d = {"kind": self.kind, "m": float(self.m)}
        if self.kind == "geometric":
            d["r"] = float(self.r)
        if self.kind == "power":
            d["s"] = float(self.s)
        return d

    @classmethod
    def from_descriptor(cls, desc: dict) -> "MassRule":
        kind = desc.get("kind")
        if kind == "constant":
            return cls("constant", _as_fraction(desc.get("m"), "family mass m"))
        if kind == "geometric":
            return cls("geometric", _as_fraction(desc.get("m"), "family mass m"),
                       r=_as_fraction(desc.get("r"), "family ratio r"))
        if kind == "power":
            return cls("power", _as_fraction(desc.get("m"), "family mass m"),
                       s=float(desc.get("s", 0.0)))
        raise ConfigError(f"unknown family mass rule {kind!r}")


@dataclass(frozen=True)
class ValueRule:
    """u_i on the family: constant c, harmonic c/i, or geometric c*rho**(i-1)."""
    kind: str
    c: float
    rho: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic", "geometric"):
            raise ConfigError(f"unknown value rule {self.kind!r}")
        if self.kind == "geometric" and not (0 < self.rho < 1):
            raise ConfigError("geometric value rule needs 0 < rho < 1")

    @property
    def is_zero(self) -> bool:
        return self.c == 0.0

    @property
    def decays(self) -> bool:
        return self.kind in ("harmonic", "geometric") or self.c == 0.0

    def value(self, i: int) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "harmonic":
            return self.c / i
        return self.c * self.rho ** (i - 1)

    def values_upto(self, n: int) -> np.ndarray:
        i = np.arange(1, n + 1, dtype=np.float64)
        if self.kind == "constant":
            return np.full(n, self.c)
        if self.kind == "harmonic":
            return self.c / i
        return self.c * self.rho ** (i - 1.0)

    def sup_abs_over(self, where: IntervalSet) -> float:
        """sup |u_i| over an index set; |values| are nonincreasing in i."""
        if where.is_empty or self.c == 0.0:
            return 0.0
        return abs(self.value(where.min_element()))

    def inf_abs_over(self, where: IntervalSet) -> float:
        if where.is_empty:
            return math.inf
        top = where.max_element()
        if top is math.inf:
            return abs(self.c) if self.kind == "constant" else 0.0
        return abs(self.value(int(top)))

    def threshold_set(self, eps: float, strict: bool = False) -> IntervalSet:
        """Indices with |u_i| >= eps (or > eps when strict)."""
        if eps <= 0:
            raise DomainError("threshold must be positive")

        def ok(i):
            v = abs(self.value(i))
            return v > eps if strict else v >= eps

        if self.kind == "constant":
            return IntervalSet.tail(1) if (self.c != 0.0 and ok(1)) else IntervalSet.empty()
        if self.c == 0.0 or not ok(1):
            return IntervalSet.empty()
        if self.kind == "harmonic":
            k = max(1, int(abs(self.c) / eps))
        else:
            k = max(1, 1 + int(math.log(eps / abs(self.c)) / math.log(self.rho)))
        guard = 0
        while ok(k + 1):
            k += 1
            guard += 1
            if guard > 256:
                raise UnsupportedRuleError("threshold inversion failed to stabilize")
        while k >= 1 and not ok(k):
            k -= 1
        return IntervalSet.span(1, k + 1) if k >= 1 else IntervalSet.empty()

    def to_descriptor(self) -> dict:
        d = {"kind": self.kind, "c": self.c}
        if self.kind == "geometric":
            d["rho"] = self.rho
        return d

    @classmethod
    def from_descriptor(cls, desc: dict) -> "ValueRule":
        kind = desc.get("kind")
        if kind in ("constant", "harmonic"):
            return cls(kind, float(desc.get("c", 0.0)))
        if kind == "geometric":
            return cls(kind, float(desc.get("c", 0.0)), rho=float(desc.get("rho", 0.5)))
        raise ConfigError(f"unknown family value rule {kind!r}")


ZERO_RULE = ValueRule("constant", 0.0)


@dataclass(frozen=True)
class CountableAtomFamily:
    mass_rule: MassRule
    truncation: int = 64

    def __post_init__(self):
        if self.truncation < 1:
            raise ConfigError("family truncation must be >= 1")

    def to_descriptor(self) -> dict:
        return {"mass_rule": self.mass_rule.to_descriptor(),
                "truncation": self.truncation}

    @classmethod
    def from_descriptor(cls, desc: dict) -> "CountableAtomFamily":
        if "mass_rule" not in desc:
            raise ConfigError("family descriptor needs a 'mass_rule' field")
        return cls(MassRule.from_descriptor(desc["mass_rule"]),
                   int(desc.get("truncation", 64)))


@dataclass(frozen=True)
class FamilyValues:
    """A value rule restricted to a support set; zero off the support."""
    rule: ValueRule = ZERO_RULE
    support: IntervalSet = IntervalSet.tail(1)

    @property
    def is_zero(self) -> bool:
        return self.rule.is_zero or self.support.is_empty

    def value(self, i: int) -> float:
        return self.rule.value(i) if self.support.contains(i) else 0.0

    def threshold_set(self, eps: float, strict: bool = False) -> IntervalSet:
        if self.is_zero:
            return IntervalSet.empty()
        return self.rule.threshold_set(eps, strict).intersect(self.support)

    def sup_abs(self, within: Optional[IntervalSet] = None) -> float:
        where = self.support if within is None else self.support.intersect(within)
        return self.rule.sup_abs_over(where)

    def inf_abs(self, within: Optional[IntervalSet] = None) -> float:
        """inf over the whole family (zero off-support counts)."""
        where = self.support if within is None else self.support.intersect(within)
        universe = IntervalSet.tail(1) if within is None else within
        off = universe.difference(where, lo=1)
        lo = self.rule.inf_abs_over(where)
        if not off.is_empty:
            lo = min(lo, 0.0)
        return 0.0 if lo is math.inf else lo

    def to_descriptor(self) -> dict:
        return {"rule": self.rule.to_descriptor(),
                "support": _family_set_descriptor(self.support)}

    @classmethod
    def from_descriptor(cls, desc: dict) -> "FamilyValues":
        rule = ValueRule.from_descriptor(desc.get("rule", {"kind": "constant", "c": 0.0}))
        support = _family_set_from_descriptor(desc.get("support", {"kind": "all"}))
        return cls(rule, support)


ZERO_FAMILY = FamilyValues()


def _family_set_descriptor(s: IntervalSet) -> dict:
    if s.is_empty:
        return {"kind": "none"}
    if s.intervals == ((1, None),):
        return {"kind": "all"}
    return {"kind": "intervals",
            "intervals": [[a, b] for a, b in s.intervals]}


def _family_set_from_descriptor(desc) -> IntervalSet:
    if desc is None:
        return IntervalSet.empty()
    kind = desc.get("kind", "intervals")
    if kind == "none":
        return IntervalSet.empty()
    if kind == "all":
        return IntervalSet.tail(1)
    if kind == "prefix":
        return IntervalSet.span(1, int(desc["k"]) + 1)
    if kind == "tail":
        return IntervalSet.tail(int(desc["k"]) + 1)
    if kind == "intervals":
        return IntervalSet.of([(a, b) for a, b in desc.get("intervals", [])])
    raise ConfigError(f"unknown family set kind {kind!r}")


# ---------------------------------------------------------------------------
# the space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    id: str
    mass: Fraction

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigError(f"atom {self.id!r} has nonpositive mass {self.mass}")


@dataclass(frozen=True)
class Segment:
    length: Fraction
    depth: int

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigError("segment length must be positive")
        if not (1 <= self.depth <= MAX_DEPTH):
            raise ConfigError(f"segment depth must be in [1, {MAX_DEPTH}]")

    @property
    def n_cells(self) -> int:
        return 1 << self.depth

    @property
    def cell_mass(self) -> Fraction:
        return self.length / self.n_cells


@dataclass(frozen=True)
class MeasureSpace:
    atoms: tuple = ()
    segment: Optional[Segment] = None
    family: Optional[CountableAtomFamily] = None

    def __post_init__(self):
        ids = [a.id for a in self.atoms]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate atom id in space descriptor")

    # -- basic geometry --------------------------------------------------
    @property
    def atom_ids(self) -> tuple:
        return tuple(a.id for a in self.atoms)

    @property
    def n_cells(self) -> int:
        return self.segment.n_cells if self.segment else 0

    @property
    def cell_mass(self) -> Fraction:
        return self.segment.cell_mass if self.segment else Fraction(0)

    def atom_index(self, atom_id: str) -> int:
        try:
            return self.atom_ids.index(atom_id)
        except ValueError:
            raise DomainError(f"unknown atom id {atom_id!r}") from None

    def atom_masses_float(self) -> np.ndarray:
        return np.array([float(a.mass) for a in self.atoms], dtype=np.float64)

    def total_measure(self):
        total = sum((a.mass for a in self.atoms), Fraction(0))
        if self.segment:
            total += self.segment.length
        if self.family:
            fam = self.family.mass_rule.total_mass()
            if fam is math.inf:
                return math.inf
            total = total + fam
        return total

    # -- refinement --------------------------------------------------------
    def with_depth(self, depth: int) -> "MeasureSpace":
        if self.segment is None:
            raise DomainError("space has no segment to refine")
        if depth < self.segment.depth:
            raise DomainError("refinement cannot reduce depth")
        if depth > MAX_DEPTH:
            raise DomainError(f"required depth {depth} exceeds the cap {MAX_DEPTH}")
        if depth == self.segment.depth:
            return self
        return MeasureSpace(self.atoms, Segment(self.segment.length, depth), self.family)

    def refines(self, other: "MeasureSpace") -> bool:
        """True when self is `other` with a (possibly) deeper segment."""
        if self.atoms != other.atoms or self.family != other.family:
            return False
        if (self.segment is None) != (other.segment is None):
            return False
        if self.segment is None:
            return True
        return (self.segment.length == other.segment.length
                and self.segment.depth >= other.segment.depth)

    # -- descriptors ---------------------------------------------------------
    def to_descriptor(self) -> dict:
        d: dict = {}
        if self.atoms:
            d["atoms"] = [{"id": a.id, "mass": float(a.mass)} for a in self.atoms]
        if self.segment:
            d["segment"] = {"length": float(self.segment.length),
                            "depth": self.segment.depth}
        if self.family:
            d["family"] = self.family.to_descriptor()
        return d

    @classmethod
    def from_descriptor(cls, desc: dict) -> "MeasureSpace":
        if not isinstance(desc, dict):
            raise ConfigError("space descriptor must be a JSON object")
        atoms = []
        for entry in desc.get("atoms", []):
            if "id" not in entry or "mass" not in entry:
                raise ConfigError("each atom needs 'id' and 'mass' fields")
            atoms.append(Atom(str(entry["id"]), _as_fraction(entry["mass"], "atom mass")))
        segment = None
        if "segment" in desc:
            seg = desc["segment"]
            if "length" not in seg or "depth" not in seg:
                raise ConfigError("segment needs 'length' and 'depth' fields")
            segment = Segment(_as_fraction(seg["length"], "segment length"), int(seg["depth"]))
        family = None
        if "family" in desc:
            family = CountableAtomFamily.from_descriptor(desc["family"])
        if not atoms and segment is None and family is None:
            raise ConfigError("space descriptor is empty")
        return cls(tuple(atoms), segment, family)


def build_space(descriptor: dict) -> MeasureSpace:
    return MeasureSpace.from_descriptor(descriptor)


# ---------------------------------------------------------------------------
# piece sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PieceSet:
    space: MeasureSpace
    atoms: frozenset = frozenset()
    cells: IntervalSet = IntervalSet.empty()
    family: IntervalSet = IntervalSet.empty()

    def __post_init__(self):
        unknown = self.atoms - set(self.space.atom_ids)
        if unknown:
            raise DomainError(f"foreign atom ids {sorted(unknown)}")
        top = self.cells.max_element()
        if top is not None and (top is math.inf or top >= self.space.n_cells):
            raise DomainError("cell indices outside the segment")
        if not self.family.is_empty and self.space.family is None:
            raise DomainError("space has no countable family")
        if self.family.min_element() is not None and self.family.min_element() < 1:
            raise DomainError("family indices are 1-based")

    @classmethod
    def empty(cls, space: MeasureSpace) -> "PieceSet":
        return cls(space)

    @classmethod
    def whole(cls, space: MeasureSpace) -> "PieceSet":
        return cls(space, frozenset(space.atom_ids),
                   IntervalSet.span(0, space.n_cells) if space.segment else IntervalSet.empty(),
                   IntervalSet.tail(1) if space.family else IntervalSet.empty())

    @property
    def is_empty(self) -> bool:
        return not self.atoms and self.cells.is_empty and self.family.is_empty

    def union(self, other: "PieceSet") -> "PieceSet":
        _require_same_space(self.space, other.space)
        return PieceSet(self.space, self.atoms | other.atoms,
                        self.cells.union(other.cells),
                        self.family.union(other.family))

    def intersect(self, other: "PieceSet") -> "PieceSet":
        _require_same_space(self.space, other.space)
        return PieceSet(self.space, self.atoms & other.atoms,
                        self.cells.intersect(other.cells),
                        self.family.intersect(other.family))

    def complement(self) -> "PieceSet":
        return PieceSet(
            self.space,
            frozenset(self.space.atom_ids) - self.atoms,
            self.cells.complement(0, self.space.n_cells),
            self.family.complement(1, None) if self.space.family else IntervalSet.empty(),
        )

    def lift(self, space: MeasureSpace) -> "PieceSet":
        if space is self.space or space == self.space:
            return PieceSet(space, self.atoms, self.cells, self.family)
        if not space.refines(self.space):
            raise SpaceMismatchError("target space is not a refinement")
        factor = 1 << (space.segment.depth - self.space.segment.depth)
        return PieceSet(space, self.atoms, self.cells.scale(factor), self.family)

    def to_descriptor(self) -> dict:
        return {"atoms": sorted(self.atoms),
                "cells": self.cells.to_descriptor(),
                "family": _family_set_descriptor(self.family)}

    @classmethod
    def from_descriptor(cls, space: MeasureSpace, desc: dict) -> "PieceSet":
        return cls(space,
                   frozenset(str(a) for a in desc.get("atoms", [])),
                   IntervalSet.from_descriptor(desc.get("cells", [])),
                   _family_set_from_descriptor(desc.get("family", {"kind": "none"})))


def _require_same_space(a: MeasureSpace, b: MeasureSpace) -> None:
    if a != b:
        raise SpaceMismatchError("objects live on different spaces")


def measure(space: MeasureSpace, piece_set: PieceSet):
    """Exact measure of a piece set (Fraction; float only via power-rule
    families; math.inf for infinite family parts)."""
    if piece_set.space != space:
        raise SpaceMismatchError("piece set belongs to a different space")
    total = sum((space.atoms[space.atom_index(a)].mass for a in piece_set.atoms),
                Fraction(0))
    count = piece_set.cells.count()
    if count:
        total += space.cell_mass * count
    if not piece_set.family.is_empty:
        fam = space.family.mass_rule.interval_mass(piece_set.family)
        if fam is math.inf:
            return math.inf
        total = total + fam
    return total


def decompose(space: MeasureSpace):
    """(nonatomic part, atomic part): the segment cells versus the explicit
    atoms together with the countable family."""
    nonatomic = PieceSet(space, frozenset(),
                         IntervalSet.span(0, space.n_cells) if space.segment else IntervalSet.empty(),
                         IntervalSet.empty())
    atomic = PieceSet(space, frozenset(space.atom_ids), IntervalSet.empty(),
                      IntervalSet.tail(1) if space.family else IntervalSet.empty())
    return nonatomic, atomic


def shrinking_sequence(space: MeasureSpace, start: PieceSet, n: int):
    """A_1 = A ⊃ A_2 ⊃ ... with mu(A_k) = mu(A) * 2**(1-k), unions of cells.

    Auto-refines the dyadic depth when the halvings outrun the current cell
    size; raises when the refinement would exceed the depth cap.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    if start.atoms or not start.family.is_empty or start.cells.is_empty:
        raise DomainError("shrinking sequences need a nonatomic (segment-only) start set")
    count = start.cells.count()
    v2 = (count & -count).bit_length() - 1  # 2-adic valuation
    extra = max(0, (n - 1) - v2)
    target_depth = space.segment.depth + extra
    if target_depth > MAX_DEPTH:
        raise DomainError(
            f"shrinking to n={n} needs depth {target_depth} > cap {MAX_DEPTH}")
    refined = space.with_depth(target_depth)
    lifted = start.lift(refined)
    m0 = lifted.cells.count()
    out = []
    for k in range(1, n + 1):
        take = m0 >> (k - 1)
        out.append(PieceSet(refined, frozenset(), lifted.cells.take_first(take),
                            IntervalSet.empty()))
    return out


# ---------------------------------------------------------------------------
# simple functions
# ---------------------------------------------------------------------------

class SimpleFunction:
    """Piecewise-constant measurable function: one value per explicit atom,
    run-length values over the segment cells, and a symbolic rule with support
    on the countable family."""

    __slots__ = ("space", "atom_values", "cell_runs", "family")

    def __init__(self, space: MeasureSpace, atom_values=None, cell_runs=None,
                 family: FamilyValues = ZERO_FAMILY):
        self.space = space
        if atom_values is None:
            atom_values = np.zeros(len(space.atoms))
        self.atom_values = np.asarray(atom_values, dtype=np.float64)
        if self.atom_values.shape != (len(space.atoms),):
            raise DomainError("atom value vector has the wrong length")
        if cell_runs is None:
            cell_runs = Runs.constant(space.n_cells, 0.0)
        if cell_runs.n != space.n_cells:
            raise DomainError("cell runs do not cover the segment")
        self.cell_runs = cell_runs
        if not isinstance(family, FamilyValues):
            raise DomainError("family part must be FamilyValues")
        if not family.is_zero and space.family is None:
            raise DomainError("space has no countable family")
        self.family = family if space.family else ZERO_FAMILY

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, space: MeasureSpace) -> "SimpleFunction":
        return cls(space)

    @classmethod
    def from_descriptor(cls, space: MeasureSpace, desc: dict) -> "SimpleFunction":
        atom_values = np.zeros(len(space.atoms))
        for aid, v in desc.get("atoms", {}).items():
            atom_values[space.atom_index(str(aid))] = float(v)
        triples = []
        for entry in desc.get("cells", []):
            if isinstance(entry, dict):
                a, b = entry["range"]
                triples.append((int(a), int(b), float(entry["value"])))
            else:
                a, b, v = entry
                triples.append((int(a), int(b), float(v)))
        try:
            runs = Runs.from_triples(space.n_cells, triples)
        except ValueError as exc:
            raise ConfigError(f"bad cell runs: {exc}") from None
        fam = ZERO_FAMILY
        if "family" in desc and desc["family"] is not None:
            fam = FamilyValues.from_descriptor(desc["family"])
        return cls(space, atom_values, runs, fam)

    def to_descriptor(self) -> dict:
        d: dict = {}
        if len(self.space.atoms):
            d["atoms"] = {aid: float(v) for aid, v in
                          zip(self.space.atom_ids, self.atom_values) if v != 0.0}
        if self.space.segment:
            d["cells"] = [[a, b, v] for a, b, v in self.cell_runs.segments() if v != 0.0]
        if self.space.family and not self.family.is_zero:
            d["family"] = self.family.to_descriptor()
        return d

    # -- alignment ----------------------------------------------------------
    def lift(self, space: MeasureSpace) -> "SimpleFunction":
        if space == self.space:
            return self
        if not space.refines(self.space):
            raise SpaceMismatchError("target space is not a refinement")
        factor = 1 << (space.segment.depth - self.space.segment.depth)
        return SimpleFunction(space, self.atom_values,
                              self.cell_runs.lift(factor), self.family)

    def _aligned_with(self, other: "SimpleFunction"):
        if self.space == other.space:
            return self, other
        if other.space.refines(self.space):
            return self.lift(other.space), other
        if self.space.refines(other.space):
            return self, other.lift(self.space)
        raise SpaceMismatchError("functions live on incompatible spaces")

    # -- pointwise algebra ---------------------------------------------------
    def _combine(self, other: "SimpleFunction", op, fam_op) -> "SimpleFunction":
        f, g = self._aligned_with(other)
        return SimpleFunction(
            f.space,
            op(f.atom_values, g.atom_values),
            f.cell_runs.binary(g.cell_runs, op),
            fam_op(f.family, g.family),
        )

    def mul(self, other: "SimpleFunction") -> "SimpleFunction":
        return self._combine(other, lambda a, b: a * b, _family_mul)

    def add(self, other: "SimpleFunction") -> "SimpleFunction":
        return self._combine(other, lambda a, b: a + b, _family_add)

    def sub(self, other: "SimpleFunction") -> "SimpleFunction":
        return self.add(other.scale(-1.0))

    def scale(self, factor: float) -> "SimpleFunction":
        fam = self.family
        if not fam.is_zero:
            rule = fam.rule
            fam = FamilyValues(ValueRule(rule.kind, rule.c * factor, rho=rule.rho),
                               fam.support)
        return SimpleFunction(self.space, self.atom_values * factor,
                              self.cell_runs.map(lambda v: v * factor), fam)

    def abs(self) -> "SimpleFunction":
        fam = self.family
        if not fam.is_zero:
            rule = fam.rule
            fam = FamilyValues(ValueRule(rule.kind, abs(rule.c), rho=rule.rho),
                               fam.support)
        return SimpleFunction(self.space, np.abs(self.atom_values),
                              self.cell_runs.map(np.abs), fam)

    def restrict(self, piece_set: PieceSet) -> "SimpleFunction":
        """self * indicator(piece_set)."""
        if piece_set.space == self.space:
            f, ps = self, piece_set
        elif piece_set.space.refines(self.space):
            f, ps = self.lift(piece_set.space), piece_set
        elif self.space.refines(piece_set.space):
            f, ps = self, piece_set.lift(self.space)
        else:
            raise SpaceMismatchError("piece set lives on an incompatible space")
        atom_mask = np.array([aid in ps.atoms for aid in f.space.atom_ids], dtype=bool)
        cell_ind = Runs.indicator(f.space.n_cells, ps.cells)
        return SimpleFunction(
            f.space,
            np.where(atom_mask, f.atom_values, 0.0),
            f.cell_runs.binary(cell_ind, lambda a, b: a * b),
            FamilyValues(f.family.rule, f.family.support.intersect(ps.family)),
        )

    # -- queries ---------------------------------------------------------
    def value_at_atom(self, atom_id: str) -> float:
        return float(self.atom_values[self.space.atom_index(atom_id)])

    def value_at_cell(self, i: int) -> float:
        return self.cell_runs.value_at(i)

    def value_at_family(self, i: int) -> float:
        return self.family.value(i)

    def threshold_set(self, eps: float, strict: bool = False) -> PieceSet:
        """Pieces where |f| >= eps (or > eps when strict)."""
        if strict:
            atom_ids = frozenset(aid for aid, v in zip(self.space.atom_ids, self.atom_values)
                                 if abs(v) > eps)
            cells = self.cell_runs.where(lambda v: np.abs(v) > eps)
        else:
            atom_ids = frozenset(aid for aid, v in zip(self.space.atom_ids, self.atom_values)
                                 if abs(v) >= eps)
            cells = self.cell_runs.where(lambda v: np.abs(v) >= eps)
        return PieceSet(self.space, atom_ids, cells,
                        self.family.threshold_set(eps, strict))

    def support(self) -> PieceSet:
        """Pieces where f is nonzero (family rules never vanish at a finite
        index unless identically zero)."""
        atom_ids = frozenset(aid for aid, v in zip(self.space.atom_ids, self.atom_values)
                             if v != 0.0)
        cells = self.cell_runs.where(lambda v: v != 0.0)
        fam = IntervalSet.empty() if self.family.is_zero else self.family.support
        return PieceSet(self.space, atom_ids, cells, fam)

    def is_zero(self) -> bool:
        return (not self.atom_values.any()
                and self.cell_runs.max_abs() == 0.0
                and self.family.is_zero)

    def __eq__(self, other):
        return (isinstance(other, SimpleFunction)
                and self.space == other.space
                and np.array_equal(self.atom_values, other.atom_values)
                and self.cell_runs == other.cell_runs
                and self.family == other.family)

    def __repr__(self):
        return (f"SimpleFunction(atoms={dict(zip(self.space.atom_ids, self.atom_values))}, "
                f"cells={list(self.cell_runs.segments())}, family={self.family})")


def _family_mul(a: FamilyValues, b: FamilyValues) -> FamilyValues:
    if a.is_zero or b.is_zero:
        return ZERO_FAMILY
    support = a.support.intersect(b.support)
    ra, rb = a.rule, b.rule
    if ra.kind == "constant":
        return FamilyValues(ValueRule(rb.kind, rb.c * ra.c, rho=rb.rho), support)
    if rb.kind == "constant":
        return FamilyValues(ValueRule(ra.kind, ra.c * rb.c, rho=ra.rho), support)
    if ra.kind == "geometric" and rb.kind == "geometric":
        return FamilyValues(ValueRule("geometric", ra.c * rb.c, rho=ra.rho * rb.rho),
                            support)
    raise UnsupportedRuleError(
        f"product of {ra.kind!r} and {rb.kind!r} family rules has no closed form")


def _family_add(a: FamilyValues, b: FamilyValues) -> FamilyValues:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    ra, rb = a.rule, b.rule
    same_kind = ra.kind == rb.kind and (ra.kind != "geometric" or ra.rho == rb.rho)
    if same_kind and a.support == b.support:
        out = ValueRule(ra.kind, ra.c + rb.c, rho=ra.rho)
        return ZERO_FAMILY if out.c == 0.0 else FamilyValues(out, a.support)
    if same_kind and ra.c + rb.c == 0.0:
        # opposite rules on nested supports survive on the set difference
        inter = a.support.intersect(b.support)
        if inter == a.support:
            return FamilyValues(rb, b.support.difference(a.support, lo=1))
        if inter == b.support:
            return FamilyValues(ra, a.support.difference(b.support, lo=1))
    raise UnsupportedRuleError(
        f"sum of {ra.kind!r} and {rb.kind!r} family rules has no closed form")


# -- module-level pointwise helpers ------------------------------------------

def indicator(piece_set: PieceSet) -> SimpleFunction:
    space = piece_set.space
    atom_values = np.array([1.0 if aid in piece_set.atoms else 0.0
                            for aid in space.atom_ids])
    runs = Runs.indicator(space.n_cells, piece_set.cells)
    fam = ZERO_FAMILY
    if not piece_set.family.is_empty:
        fam = FamilyValues(ValueRule("constant", 1.0), piece_set.family)
    return SimpleFunction(space, atom_values, runs, fam)


def pointwise_mul(f: SimpleFunction, g: SimpleFunction) -> SimpleFunction:
    return f.mul(g)


def scale(f: SimpleFunction, factor: float) -> SimpleFunction:
    return f.scale(factor)


def absolute(f: SimpleFunction) -> SimpleFunction:
    return f.abs()


def ess_sup(f: SimpleFunction, weight: Optional["WeightedStructure"] = None) -> float:
    """max |f| over pieces of positive mass (positive omega*mu mass when a
    weight is given)."""
    best = 0.0
    if weight is None:
        if f.atom_values.size:
            best = float(np.abs(f.atom_values).max())
        best = max(best, f.cell_runs.max_abs(), f.family.sup_abs())
        return best
    _require_same_space(f.space, weight.space)
    mask = weight.atom_omega_float() > 0.0
    if mask.any():
        best = float(np.abs(f.atom_values[mask]).max())
    if f.space.n_cells:
        _, fv, wv = aligned(f.cell_runs, weight.cell_omega_runs())
        pos = wv > 0.0
        if pos.any():
            best = max(best, float(np.abs(fv[pos]).max()))
    best = max(best, f.family.sup_abs(within=weight.family_positive_set()))
    return best


def ess_inf_abs(f: SimpleFunction, weight: Optional["WeightedStructure"] = None) -> float:
    """inf |f| over pieces of positive (weighted) mass; family rules
    contribute their symbolic infimum."""
    candidates = []
    if weight is None:
        if f.atom_values.size:
            candidates.append(float(np.abs(f.atom_values).min()))
        if f.space.n_cells:
            candidates.append(f.cell_runs.min_abs())
        if f.space.family:
            candidates.append(f.family.inf_abs())
    else:
        _require_same_space(f.space, weight.space)
        mask = weight.atom_omega_float() > 0.0
        if mask.any():
            candidates.append(float(np.abs(f.atom_values[mask]).min()))
        if f.space.n_cells:
            _, fv, wv = aligned(f.cell_runs, weight.cell_omega_runs())
            pos = wv > 0.0
            if pos.any():
                candidates.append(float(np.abs(fv[pos]).min()))
        pos_fam = weight.family_positive_set()
        if f.space.family and not pos_fam.is_empty:
            candidates.append(f.family.inf_abs(within=pos_fam))
    return min(candidates) if candidates else math.inf


# ---------------------------------------------------------------------------
# measurable transformations and Radon-Nikodym weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellMap:
    kind: str  # identity | constant | explicit
    target: int = 0
    table: tuple = ()

    @classmethod
    def identity(cls) -> "CellMap":
        return cls("identity")

    @classmethod
    def constant(cls, target: int) -> "CellMap":
        return cls("constant", target=int(target))

    @classmethod
    def explicit(cls, table) -> "CellMap":
        return cls("explicit", table=tuple(int(t) for t in table))


@dataclass(frozen=True)
class FamilyMap:
    kind: str  # identity | shift
    s: int = 0

    @classmethod
    def identity(cls) -> "FamilyMap":
        return cls("identity")

    @classmethod
    def shift(cls, s: int) -> "FamilyMap":
        if s < 1:
            raise ConfigError("family shift needs s >= 1")
        return cls("shift", s=int(s))


@dataclass(frozen=True)
class Tau:
    """A piece-to-piece measurable transformation: atoms to atoms, cells to
    cells at equal depth, family indices by rule."""
    atom_map: tuple = ()  # ((src, dst), ...)
    cell_map: CellMap = CellMap.identity()
    family_map: FamilyMap = FamilyMap.identity()

    def atom_dict(self) -> dict:
        return dict(self.atom_map)

    def to_descriptor(self) -> dict:
        d: dict = {}
        if self.atom_map:
            d["atoms"] = dict(self.atom_map)
        if self.cell_map.kind != "identity":
            if self.cell_map.kind == "constant":
                d["cells"] = {"kind": "constant", "target": self.cell_map.target}
            else:
                d["cells"] = {"kind": "explicit", "map": list(self.cell_map.table)}
        if self.family_map.kind != "identity":
            d["family"] = {"kind": "shift", "s": self.family_map.s}
        return d

    @classmethod
    def from_descriptor(cls, desc: dict) -> "Tau":
        desc = desc or {}
        atom_map = tuple(sorted((str(k), str(v)) for k, v in desc.get("atoms", {}).items()))
        cells = desc.get("cells", {"kind": "identity"})
        kind = cells.get("kind", "identity")
        if kind == "identity":
            cell_map = CellMap.identity()
        elif kind == "constant":
            cell_map = CellMap.constant(cells["target"])
        elif kind == "explicit":
            cell_map = CellMap.explicit(cells["map"])
        else:
            raise ConfigError(f"unknown cell map kind {kind!r}")
        fam = desc.get("family", {"kind": "identity"})
        fkind = fam.get("kind", "identity")
        if fkind == "identity":
            family_map = FamilyMap.identity()
        elif fkind == "shift":
            family_map = FamilyMap.shift(fam["s"])
        else:
            raise ConfigError(f"unknown family map kind {fkind!r}")
        return cls(atom_map, cell_map, family_map)


_EXPLICIT_CELL_CAP = 1 << 12  # explicit cell tables stay desk-scale


def _validate_tau(space: MeasureSpace, tau: Tau) -> None:
    ids = set(space.atom_ids)
    amap = tau.atom_dict()
    for src, dst in amap.items():
        if src not in ids or dst not in ids:
            raise ConfigError(f"atom map {src!r}->{dst!r} references unknown atoms")
    cm = tau.cell_map
    if cm.kind != "identity" and space.segment is None:
        raise ConfigError("cell map given but the space has no segment")
    if cm.kind == "constant" and not (0 <= cm.target < space.n_cells):
        raise ConfigError("cell map target outside the segment")
    if cm.kind == "explicit":
        if space.n_cells > _EXPLICIT_CELL_CAP:
            raise ConfigError(
                f"explicit cell maps are limited to depth <= {_EXPLICIT_CELL_CAP.bit_length()-1}")
        if len(cm.table) != space.n_cells:
            raise ConfigError("explicit cell map must list every cell")
        if any(not (0 <= t < space.n_cells) for t in cm.table):
            raise ConfigError("explicit cell map target outside the segment")
    if tau.family_map.kind != "identity" and space.family is None:
        raise ConfigError("family map given but the space has no family")


class WeightedStructure:
    """tau together with the derived weight omega = d(mu o tau^{-1}) / d(mu).

    On the model every piece has positive mass, so tau is automatically
    nonsingular; the check is recorded.  omega(p) = mu(tau^{-1}{p}) / mu({p})
    exactly (rationals), and the pushforward identity
    mu(tau^{-1}A) = sum_{p in A} omega(p) mu(p) holds exactly for every A.
    """

    __slots__ = ("space", "tau", "atom_omega", "cell_omega", "nonsingular")

    def __init__(self, space: MeasureSpace, tau: Tau):
        _validate_tau(space, tau)
        self.space = space
        self.tau = tau
        self.nonsingular = True  # every piece has positive mass
        amap = tau.atom_dict()
        pre_mass = {aid: Fraction(0) for aid in space.atom_ids}
        for atom in space.atoms:
            dst = amap.get(atom.id, atom.id)
            pre_mass[dst] += atom.mass
        self.atom_omega = tuple(pre_mass[a.id] / a.mass for a in space.atoms)
        n = space.n_cells
        cm = tau.cell_map
        if n == 0 or cm.kind == "identity":
            self.cell_omega = ((0, n, Fraction(1)),) if n else ()
        elif cm.kind == "constant":
            t = cm.target
            self.cell_omega = tuple(
                (a, b, v) for a, b, v in
                [(0, t, Fraction(0)), (t, t + 1, Fraction(n)), (t + 1, n, Fraction(0))]
                if b > a)
        else:
            counts = np.bincount(np.asarray(cm.table), minlength=n)
            triples = []
            start = 0
            for i in range(1, n + 1):
                if i == n or counts[i] != counts[start]:
                    triples.append((start, i, Fraction(int(counts[start]))))
                    start = i
            self.cell_omega = tuple(triples)

    # -- omega views -------------------------------------------------------
    def atom_omega_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.atom_omega], dtype=np.float64)

    def cell_omega_runs(self) -> Runs:
        n = self.space.n_cells
        if n == 0:
            return Runs.constant(0, 0.0)
        return Runs.from_triples(n, [(a, b, float(v)) for a, b, v in self.cell_omega])

    def family_omega(self, i: int):
        fm = self.tau.family_map
        rule = self.space.family.mass_rule
        if fm.kind == "identity":
            return Fraction(1)
        if i <= fm.s:
            return Fraction(0)
        num, den = rule.mass(i - fm.s), rule.mass(i)
        if isinstance(num, Fraction) and isinstance(den, Fraction):
            return num / den
        return float(num) / float(den)

    def family_omega_upto(self, n: int) -> np.ndarray:
        return np.array([float(self.family_omega(i)) for i in range(1, n + 1)])

    def family_positive_set(self) -> IntervalSet:
        if self.space.family is None:
            return IntervalSet.empty()
        fm = self.tau.family_map
        return IntervalSet.tail(1) if fm.kind == "identity" else IntervalSet.tail(fm.s + 1)

    def family_omega_sup_tail(self, n: int) -> float:
        """Upper bound for omega on family indices > n (rules are monotone)."""
        fm = self.tau.family_map
        if fm.kind == "identity":
            return 1.0
        rule = self.space.family.mass_rule
        if rule.kind == "constant":
            return 1.0
        if rule.kind == "geometric":
            return float(rule.r) ** (-fm.s)
        i = max(n + 1, fm.s + 1)
        return (float(i - fm.s) / float(i)) ** (-rule.s)

    # -- set maps ------------------------------------------------------------
    def preimage(self, piece_set: PieceSet) -> PieceSet:
        _require_same_space(self.space, piece_set.space)
        amap = self.tau.atom_dict()
        atoms = frozenset(a.id for a in self.space.atoms
                          if amap.get(a.id, a.id) in piece_set.atoms)
        cm = self.tau.cell_map
        if cm.kind == "identity":
            cells = piece_set.cells
        elif cm.kind == "constant":
            cells = (IntervalSet.span(0, self.space.n_cells)
                     if piece_set.cells.contains(cm.target) else IntervalSet.empty())
        else:
            table = np.asarray(cm.table)
            hit = np.fromiter((piece_set.cells.contains(int(t)) for t in table),
                              dtype=bool, count=len(table))
            idx = np.flatnonzero(hit)
            pairs = []
            if idx.size:
                breaks = np.flatnonzero(np.diff(idx) > 1)
                starts = np.concatenate([[0], breaks + 1])
                stops = np.concatenate([breaks, [idx.size - 1]])
                pairs = [(int(idx[a]), int(idx[b]) + 1) for a, b in zip(starts, stops)]
            cells = IntervalSet.of(pairs)
        fm = self.tau.family_map
        if fm.kind == "identity":
            fam = piece_set.family
        else:
            fam = IntervalSet.of(
                [(max(1, a - fm.s), None if b is None else max(1, b - fm.s))
                 for a, b in piece_set.family.intervals])
        return PieceSet(self.space, atoms, cells, fam)

    def pushforward_measure(self, piece_set: PieceSet):
        """mu(tau^{-1}(A)), exact."""
        return measure(self.space, self.preimage(piece_set))

    def weighted_measure_sum(self, piece_set: PieceSet):
        """sum over A of omega(p) * mu(p), piece by piece (the other side of
        the Radon-Nikodym identity)."""
        _require_same_space(self.space, piece_set.space)
        total = Fraction(0)
        for aid in piece_set.atoms:
            j = self.space.atom_index(aid)
            total += self.atom_omega[j] * self.space.atoms[j].mass
        for a, b, w in self.cell_omega:
            seg = piece_set.cells.intersect(IntervalSet.span(a, b))
            total += w * self.space.cell_mass * seg.count()
        if not piece_set.family.is_empty:
            pre = self.preimage(PieceSet(self.space, frozenset(), IntervalSet.empty(),
                                         piece_set.family))
            fam = self.space.family.mass_rule.interval_mass(pre.family)
            if fam is math.inf:
                return math.inf
            total = total + fam
        return total

    def omega_null_set(self) -> PieceSet:
        """Pieces where omega vanishes (there the weighted norm is only a
        seminorm with respect to mu)."""
        atoms = frozenset(a.id for a, w in zip(self.space.atoms, self.atom_omega)
                          if w == 0)
        cells = IntervalSet.of([(a, b) for a, b, w in self.cell_omega if w == 0])
        fam = IntervalSet.empty()
        if self.space.family is not None:
            fm = self.tau.family_map
            if fm.kind == "shift":
                fam = IntervalSet.span(1, fm.s + 1)
        return PieceSet(self.space, atoms, cells, fam)

    def omega_at_least_one(self):
        """(holds, offending piece description): omega(p) >= 1 for every
        piece, which by additivity is mu(tau^{-1}E) >= mu(E) for every E."""
        for atom, w in zip(self.space.atoms, self.atom_omega):
            if w < 1:
                return False, f"atom {atom.id!r} has omega={w}"
        for a, b, w in self.cell_omega:
            if w < 1:
                return False, f"cells [{a},{b}) have omega={w}"
        if self.space.family is not None and self.tau.family_map.kind == "shift":
            return False, f"family indices 1..{self.tau.family_map.s} have omega=0"
        return True, None


def derive_weight(space: MeasureSpace, tau: Tau) -> WeightedStructure:
    return WeightedStructure(space, tau)


def preimage(weighted: WeightedStructure, piece_set: PieceSet) -> PieceSet:
    return weighted.preimage(piece_set)
