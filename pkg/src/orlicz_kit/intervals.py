"""Sorted disjoint integer interval sets.

Half-open ``[start, stop)`` intervals over nonnegative integers; ``stop=None``
marks an interval extending to infinity.  Dyadic-cell index sets and countable
atom-family index sets both use this representation, which supports exact
complement / intersection / union and counting without materializing elements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional


def _normalize(pairs) -> tuple:
    ivs = []
    for a, b in pairs:
        a = int(a)
        if b is not None:
            b = int(b)
            if b <= a:
                continue
        ivs.append((a, b))
    ivs.sort(key=lambda iv: iv[0])
    out: list = []
    for a, b in ivs:
        if out:
            pa, pb = out[-1]
            if pb is None:
                continue
            if a <= pb:
                out[-1] = (pa, None if b is None else max(pb, b))
                continue
        out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class IntervalSet:
    intervals: tuple = ()

    @classmethod
    def of(cls, pairs: Iterable) -> "IntervalSet":
        return cls(_normalize(pairs))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def span(cls, start: int, stop: int) -> "IntervalSet":
        return cls.of([(start, stop)])

    @classmethod
    def tail(cls, start: int) -> "IntervalSet":
        return cls(((int(start), None),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_finite(self) -> bool:
        return all(b is not None for _, b in self.intervals)

    def count(self):
        """Number of integers in the set (math.inf when unbounded)."""
        total = 0
        for a, b in self.intervals:
            if b is None:
                return math.inf
            total += b - a
        return total

    def min_element(self) -> Optional[int]:
        return self.intervals[0][0] if self.intervals else None

    def max_element(self):
        """Largest element; math.inf when unbounded, None when empty."""
        if not self.intervals:
            return None
        a, b = self.intervals[-1]
        return math.inf if b is None else b - 1

    def contains(self, i: int) -> bool:
        for a, b in self.intervals:
            if i < a:
                return False
            if b is None or i < b:
                return True
        return False

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.of(list(self.intervals) + list(other.intervals))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo = max(a, c)
                if b is None:
                    hi = d
                elif d is None:
                    hi = b
                else:
                    hi = min(b, d)
                if hi is None or lo < hi:
                    out.append((lo, hi))
        return IntervalSet.of(out)

    def complement(self, lo: int, hi: Optional[int]) -> "IntervalSet":
        """Complement within the universe [lo, hi); hi=None means unbounded."""
        out = []
        cur = lo
        for a, b in self.intervals:
            if hi is not None and a >= hi:
                break
            if a > cur:
                out.append((cur, min(a, hi) if hi is not None else a))
            cur = max(cur, a if b is None else b)
            if b is None:
                return IntervalSet.of(out)
        if hi is None or cur < hi:
            out.append((cur, hi))
        return IntervalSet.of(out)

    def difference(self, other: "IntervalSet", lo: int = 0, hi: Optional[int] = None) -> "IntervalSet":
        if hi is None and not self.is_finite:
            universe_hi = None
        else:
            m = self.max_element()
            universe_hi = hi if hi is not None else (None if m is None else int(m) + 1)
        return self.intersect(other.complement(lo, universe_hi))

    def take_first(self, m: int) -> "IntervalSet":
        """The m smallest elements of the set."""
        out = []
        need = m
        for a, b in self.intervals:
            if need <= 0:
                break
            if b is None:
                out.append((a, a + need))
                need = 0
            else:
                take = min(need, b - a)
                out.append((a, a + take))
                need -= take
        if need > 0:
            raise ValueError(f"set has fewer than {m} elements")
        return IntervalSet.of(out)

    def scale(self, factor: int) -> "IntervalSet":
        """Map [a,b) -> [a*factor, b*factor); refinement of dyadic indices."""
        return IntervalSet(tuple((a * factor, None if b is None else b * factor)
                                 for a, b in self.intervals))

    def elements(self, limit: int = 1 << 20):
        n = 0
        for a, b in self.intervals:
            if b is None:
                raise ValueError("cannot enumerate an unbounded interval set")
            for i in range(a, b):
                if n >= limit:
                    raise ValueError("interval set too large to enumerate")
                yield i
                n += 1

    def to_descriptor(self):
        return [[a, b] for a, b in self.intervals]

    @classmethod
    def from_descriptor(cls, pairs) -> "IntervalSet":
        return cls.of([(a, b) for a, b in pairs])
