"""Run-length encoded piecewise-constant values over dyadic cell indices.

A Runs object covers [0, n) with k runs: bounds[0]=0 < ... < bounds[k]=n and
one float value per run.  All pointwise algebra merges boundaries, so costs
scale with the number of runs, not with 2**depth.
"""
from __future__ import annotations

import numpy as np

from .intervals import IntervalSet


def _canonical(bounds, values):
    bounds = np.asarray(bounds, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if bounds.size == 0:
        return np.zeros(1, np.int64), np.empty(0)
    lengths = np.diff(bounds)
    keep = lengths > 0
    vals = values[keep]
    edges = np.concatenate([bounds[:1], bounds[1:][keep]])
    if vals.size:
        change = np.concatenate([[True], vals[1:] != vals[:-1]])
        vals = vals[change]
        edges = np.concatenate([edges[:-1][change], edges[-1:]])
    return edges, vals


class Runs:
    __slots__ = ("bounds", "values")

    def __init__(self, bounds, values):
        self.bounds, self.values = _canonical(bounds, values)

    @property
    def n(self) -> int:
        return int(self.bounds[-1])

    @classmethod
    def constant(cls, n: int, value: float) -> "Runs":
        if n == 0:
            return cls([0], [])
        return cls([0, n], [value])

    @classmethod
    def from_triples(cls, n: int, triples, fill: float = 0.0) -> "Runs":
        """Build from disjoint (start, stop, value) triples, `fill` elsewhere."""
        base = [(int(a), int(b), float(v)) for a, b, v in triples if b > a]
        base.sort()
        edges = [0]
        vals = []
        cur = 0
        for a, b, v in base:
            if a < cur or b > n:
                raise ValueError("overlapping or out-of-range run triples")
            if a > cur:
                edges.append(a)
                vals.append(fill)
            edges.append(b)
            vals.append(v)
            cur = b
        if cur < n:
            edges.append(n)
            vals.append(fill)
        if n == 0:
            return cls([0], [])
        return cls(edges, vals)

    @classmethod
    def indicator(cls, n: int, cells: IntervalSet, value: float = 1.0) -> "Runs":
        return cls.from_triples(n, [(a, b, value) for a, b in cells.intervals])

    def map(self, fn) -> "Runs":
        return Runs(self.bounds, fn(self.values))

    def binary(self, other: "Runs", fn) -> "Runs":
        edges, a, b = aligned(self, other)
        return Runs(edges, fn(a, b))

    def where(self, pred) -> IntervalSet:
        """Cells whose run value satisfies the vectorized predicate."""
        if self.values.size == 0:
            return IntervalSet.empty()
        mask = pred(self.values)
        pairs = [(int(self.bounds[j]), int(self.bounds[j + 1]))
                 for j in range(len(mask)) if mask[j]]
        return IntervalSet.of(pairs)

    def segments(self):
        for j in range(len(self.values)):
            yield int(self.bounds[j]), int(self.bounds[j + 1]), float(self.values[j])

    def lengths(self) -> np.ndarray:
        return np.diff(self.bounds)

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def min_abs(self) -> float:
        return float(np.abs(self.values).min()) if self.values.size else 0.0

    def value_at(self, i: int) -> float:
        j = int(np.searchsorted(self.bounds, i, side="right")) - 1
        if j < 0 or j >= len(self.values):
            raise IndexError(i)
        return float(self.values[j])

    def lift(self, factor: int) -> "Runs":
        return Runs(self.bounds * factor, self.values)

    def __eq__(self, other):
        return (isinstance(other, Runs)
                and np.array_equal(self.bounds, other.bounds)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"Runs({list(self.segments())})"


def aligned(f: Runs, g: Runs):
    """Common edges plus per-run values of both sides."""
    if f.n != g.n:
        raise ValueError("runs cover different index ranges")
    edges = np.union1d(f.bounds, g.bounds)
    lefts = edges[:-1]
    jf = np.searchsorted(f.bounds, lefts, side="right") - 1
    jg = np.searchsorted(g.bounds, lefts, side="right") - 1
    return edges, f.values[jf], g.values[jg]
