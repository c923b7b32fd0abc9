"""Measure-space model: construction, measures, decomposition, weights."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_kit import (ConfigError, DomainError, MeasureSpace, PieceSet,
                        SimpleFunction, Tau, UnsupportedRuleError, absolute,
                        build_space, decompose, derive_weight, ess_inf_abs,
                        ess_sup, indicator, measure, pointwise_mul, preimage,
                        scale, shrinking_sequence)
from orlicz_kit.intervals import IntervalSet
from orlicz_kit.spaces import Atom, FamilyValues, ValueRule


def two_atom_space(m1=0.5, m2=0.5):
    return build_space({"atoms": [{"id": "a1", "mass": m1}, {"id": "a2", "mass": m2}]})


def segment_space(length=1.0, depth=3):
    return build_space({"segment": {"length": length, "depth": depth}})


def mixed_space():
    return build_space({
        "atoms": [{"id": "a", "mass": 0.3}, {"id": "b", "mass": 0.7}],
        "segment": {"length": 2.0, "depth": 4},
        "family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}},
    })


class TestBuildSpace:
    def test_one_atom(self):
        space = build_space({"atoms": [{"id": "a", "mass": 1.0}]})
        assert space.total_measure() == 1

    def test_dyadic_split(self):
        space = segment_space(1.0, 3)
        assert space.n_cells == 8
        assert space.cell_mass == Fraction(1, 8)

    def test_negative_mass_rejected(self):
        with pytest.raises(ConfigError):
            build_space({"atoms": [{"id": "a", "mass": -1.0}]})

    def test_duplicate_id_rejected(self):
        with pytest.raises(ConfigError):
            build_space({"atoms": [{"id": "a", "mass": 1.0}, {"id": "a", "mass": 2.0}]})

    def test_missing_fields_rejected(self):
        with pytest.raises(ConfigError):
            build_space({"atoms": [{"mass": 1.0}]})
        with pytest.raises(ConfigError):
            build_space({"segment": {"length": 1.0}})
        with pytest.raises(ConfigError):
            build_space({})

    def test_depth_cap(self):
        with pytest.raises(ConfigError):
            build_space({"segment": {"length": 1.0, "depth": 25}})

    def test_fractional_string_masses(self):
        space = build_space({"atoms": [{"id": "a", "mass": "1/3"},
                                       {"id": "b", "mass": "2/3"}]})
        assert space.total_measure() == 1


class TestMeasure:
    def test_empty_set(self):
        space = mixed_space()
        assert measure(space, PieceSet.empty(space)) == 0

    def test_three_cells(self):
        space = segment_space(1.0, 3)
        ps = PieceSet(space, cells=IntervalSet.span(0, 3))
        assert measure(space, ps) == Fraction(3, 8)

    def test_geometric_family_total(self):
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        ps = PieceSet(space, family=IntervalSet.tail(1))
        assert measure(space, ps) == 1

    def test_constant_family_infinite(self):
        space = build_space({"family": {"mass_rule": {"kind": "constant", "m": 1.0}}})
        ps = PieceSet(space, family=IntervalSet.tail(1))
        assert measure(space, ps) is math.inf

    def test_power_family_prefix_matches_brute_force(self):
        space = build_space({"family": {"mass_rule": {"kind": "power", "m": 2.0, "s": 2.0}}})
        ps = PieceSet(space, family=IntervalSet.span(1, 101))
        brute = sum(2.0 * i ** -2.0 for i in range(1, 101))
        assert measure(space, ps) == pytest.approx(brute, rel=1e-12)

    def test_foreign_atom_rejected(self):
        space = two_atom_space()
        with pytest.raises(DomainError):
            PieceSet(space, atoms=frozenset({"zz"}))

    def test_additivity_exact(self):
        space = mixed_space()
        rng = np.random.default_rng(3)
        for _ in range(50):
            cut = int(rng.integers(0, space.n_cells))
            a = PieceSet(space, frozenset({"a"}), IntervalSet.span(0, cut),
                         IntervalSet.span(1, 4))
            b = PieceSet(space, frozenset({"b"}),
                         IntervalSet.span(cut, space.n_cells),
                         IntervalSet.span(4, int(rng.integers(4, 30))))
            assert a.intersect(b).is_empty
            assert measure(space, a.union(b)) == measure(space, a) + measure(space, b)


class TestDecompose:
    def test_atoms_only(self):
        space = two_atom_space()
        nonat, atomic = decompose(space)
        assert nonat.is_empty
        assert atomic.atoms == frozenset({"a1", "a2"})

    def test_segment_only(self):
        space = segment_space()
        nonat, atomic = decompose(space)
        assert atomic.is_empty
        assert measure(space, nonat) == 1

    def test_mixed_partition(self):
        space = mixed_space()
        nonat, atomic = decompose(space)
        assert nonat.intersect(atomic).is_empty
        assert measure(space, nonat) + measure(space, atomic) == space.total_measure()


class TestShrinkingSequence:
    def test_full_segment_halving(self):
        space = segment_space(1.0, 3)
        seq = shrinking_sequence(space, PieceSet(space, cells=IntervalSet.span(0, 8)), 4)
        got = [measure(s.space, s) for s in seq]
        assert got == [1, Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]

    def test_single_step_is_identity(self):
        space = segment_space(1.0, 3)
        start = PieceSet(space, cells=IntervalSet.span(0, 8))
        seq = shrinking_sequence(space, start, 1)
        assert len(seq) == 1
        assert measure(seq[0].space, seq[0]) == 1

    def test_half_segment(self):
        space = segment_space(1.0, 3)
        seq = shrinking_sequence(space, PieceSet(space, cells=IntervalSet.span(0, 4)), 3)
        got = [measure(s.space, s) for s in seq]
        assert got == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]

    def test_nested_and_strictly_decreasing(self):
        space = segment_space(1.0, 2)
        seq = shrinking_sequence(space, PieceSet(space, cells=IntervalSet.span(0, 3)), 6)
        measures = [measure(s.space, s) for s in seq]
        for big, small in zip(seq, seq[1:]):
            assert big.cells.intersect(small.cells) == small.cells
        for a, b in zip(measures, measures[1:]):
            assert a > b > 0

    def test_eventually_below_one_over_k(self):
        space = segment_space(1.0, 1)
        seq = shrinking_sequence(space, PieceSet(space, cells=IntervalSet.span(0, 2)), 10)
        measures = [float(measure(s.space, s)) for s in seq]
        k0 = 4
        for k in range(k0, 11):
            assert measures[k - 1] < 1.0 / k

    def test_atomic_start_rejected(self):
        space = mixed_space()
        with pytest.raises(DomainError):
            shrinking_sequence(space, PieceSet(space, atoms=frozenset({"a"})), 3)

    def test_depth_exhaustion_names_requirement(self):
        space = segment_space(1.0, 3)
        start = PieceSet(space, cells=IntervalSet.span(0, 1))
        with pytest.raises(DomainError, match="depth"):
            shrinking_sequence(space, start, 30)


class TestPreimageAndWeights:
    def test_identity(self):
        space = two_atom_space()
        w = derive_weight(space, Tau())
        ps = PieceSet(space, atoms=frozenset({"a1"}))
        assert preimage(w, ps).atoms == frozenset({"a1"})
        assert w.atom_omega == (Fraction(1), Fraction(1))

    def test_collapse(self):
        space = two_atom_space()
        tau = Tau.from_descriptor({"atoms": {"a1": "a2", "a2": "a2"}})
        w = derive_weight(space, tau)
        ps = PieceSet(space, atoms=frozenset({"a2"}))
        assert preimage(w, ps).atoms == frozenset({"a1", "a2"})
        # omega by the preimage-mass oracle: mu(tau^-1{p}) / mu({p})
        assert w.atom_omega == (Fraction(0), Fraction(2))

    def test_swap_equal_masses(self):
        space = two_atom_space()
        tau = Tau.from_descriptor({"atoms": {"a1": "a2", "a2": "a1"}})
        w = derive_weight(space, tau)
        assert w.atom_omega == (Fraction(1), Fraction(1))

    def test_constant_cell_map(self):
        space = segment_space(1.0, 3)
        tau = Tau.from_descriptor({"cells": {"kind": "constant", "target": 2}})
        w = derive_weight(space, tau)
        hit = preimage(w, PieceSet(space, cells=IntervalSet.span(2, 3)))
        assert hit.cells == IntervalSet.span(0, 8)
        miss = preimage(w, PieceSet(space, cells=IntervalSet.span(0, 2)))
        assert miss.cells.is_empty

    def test_pushforward_identity_exact(self):
        rng = np.random.default_rng(11)
        for trial in range(200):
            n_atoms = int(rng.integers(1, 5))
            masses = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
                      for _ in range(n_atoms)]
            space = MeasureSpace(
                tuple(Atom(f"a{i}", m) for i, m in enumerate(masses)))
            ids = list(space.atom_ids)
            amap = {i: ids[int(rng.integers(0, n_atoms))] for i in ids}
            w = derive_weight(space, Tau.from_descriptor({"atoms": amap}))
            subset = frozenset(i for i in ids if rng.random() < 0.5)
            ps = PieceSet(space, atoms=subset)
            assert w.pushforward_measure(ps) == w.weighted_measure_sum(ps)

    def test_omega_null_set_reported(self):
        space = two_atom_space()
        tau = Tau.from_descriptor({"atoms": {"a1": "a2", "a2": "a2"}})
        w = derive_weight(space, tau)
        assert w.omega_null_set().atoms == frozenset({"a1"})

    def test_family_shift_weight(self):
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        w = derive_weight(space, Tau.from_descriptor({"family": {"kind": "shift", "s": 1}}))
        assert w.family_omega(1) == 0
        assert w.family_omega(2) == 2  # mass(1)/mass(2) = 1/r
        ps = PieceSet(space, family=IntervalSet.span(2, 4))
        assert w.pushforward_measure(ps) == w.weighted_measure_sum(ps)

    def test_unknown_atom_in_tau_rejected(self):
        space = two_atom_space()
        with pytest.raises(ConfigError):
            derive_weight(space, Tau.from_descriptor({"atoms": {"zz": "a1"}}))


class TestSimpleOps:
    def test_indicator_of_empty_is_zero(self):
        space = mixed_space()
        assert indicator(PieceSet.empty(space)).is_zero()

    def test_ess_sup_two_atoms(self):
        space = two_atom_space()
        u = SimpleFunction.from_descriptor(space, {"atoms": {"a1": 2.0, "a2": 5.0}})
        assert ess_sup(u) == 5.0

    def test_ess_sup_harmonic_family(self):
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        u = SimpleFunction(space, family=FamilyValues(ValueRule("harmonic", 3.0),
                                                      IntervalSet.tail(1)))
        assert ess_sup(u) == 3.0  # attained at the first index

    def test_ess_inf_harmonic_family_vanishes(self):
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        u = SimpleFunction(space, family=FamilyValues(ValueRule("harmonic", 3.0),
                                                      IntervalSet.tail(1)))
        assert ess_inf_abs(u) == 0.0

    def test_pointwise_mul_and_scale(self):
        space = two_atom_space()
        f = SimpleFunction.from_descriptor(space, {"atoms": {"a1": 2.0, "a2": 3.0}})
        g = SimpleFunction.from_descriptor(space, {"atoms": {"a1": -1.0, "a2": 4.0}})
        assert list(pointwise_mul(f, g).atom_values) == [-2.0, 12.0]
        assert list(scale(f, 2.0).atom_values) == [4.0, 6.0]
        assert list(absolute(g).atom_values) == [1.0, 4.0]

    def test_mismatched_spaces_rejected(self):
        f = SimpleFunction.zero(two_atom_space())
        g = SimpleFunction.zero(two_atom_space(0.3, 0.7))
        with pytest.raises(DomainError):
            f.add(g)

    def test_unsupported_rule_product(self):
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        h = SimpleFunction(space, family=FamilyValues(ValueRule("harmonic", 1.0),
                                                      IntervalSet.tail(1)))
        with pytest.raises(UnsupportedRuleError):
            h.mul(h)

    def test_truncation_difference_support(self):
        # opposite rules on nested supports land on the set difference
        space = build_space({"family": {"mass_rule": {"kind": "geometric", "m": 0.5, "r": 0.5}}})
        full = SimpleFunction(space, family=FamilyValues(ValueRule("harmonic", 1.0),
                                                         IntervalSet.tail(1)))
        head = SimpleFunction(space, family=FamilyValues(ValueRule("harmonic", 1.0),
                                                         IntervalSet.span(1, 6)))
        diff = head.sub(full)
        assert diff.family.support == IntervalSet.tail(6)
        assert diff.value_at_family(7) == pytest.approx(-1.0 / 7)
        assert diff.value_at_family(3) == 0.0

    def test_descriptor_roundtrip(self):
        space = mixed_space()
        f = SimpleFunction.from_descriptor(space, {
            "atoms": {"a": 2.0},
            "cells": [[0, 5, 1.5], [7, 9, -2.0]],
            "family": {"rule": {"kind": "harmonic", "c": 1.0}, "support": {"kind": "all"}},
        })
        again = SimpleFunction.from_descriptor(space, f.to_descriptor())
        assert again == f

    def test_lift_preserves_measure_and_values(self):
        space = segment_space(1.0, 3)
        f = SimpleFunction.from_descriptor(space, {"cells": [[0, 4, 2.0]]})
        fine = space.with_depth(6)
        g = f.lift(fine)
        assert g.value_at_cell(0) == 2.0
        assert g.value_at_cell(31) == 2.0
        assert g.value_at_cell(32) == 0.0
        ps = PieceSet(space, cells=IntervalSet.span(0, 4))
        assert measure(fine, ps.lift(fine)) == measure(space, ps)


class TestPieceSetAlgebra:
    def test_complement_partition(self):
        space = mixed_space()
        ps = PieceSet(space, frozenset({"a"}), IntervalSet.span(3, 9),
                      IntervalSet.span(1, 5))
        comp = ps.complement()
        assert ps.intersect(comp).is_empty
        union = ps.union(comp)
        assert union.atoms == frozenset(space.atom_ids)
        assert union.cells == IntervalSet.span(0, space.n_cells)

    def test_descriptor_roundtrip(self):
        space = mixed_space()
        ps = PieceSet(space, frozenset({"b"}), IntervalSet.span(0, 2),
                      IntervalSet.tail(3))
        assert PieceSet.from_descriptor(space, ps.to_descriptor()) == ps


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
@settings(max_examples=300, deadline=None)
def test_interval_algebra(a, b, c, d):
    s = IntervalSet.of([(a, b)])
    t = IntervalSet.of([(c, d)])
    hi = 64
    comp = s.complement(0, hi)
    assert s.intersect(comp).is_empty
    assert s.union(comp).count() == hi
    inter = s.intersect(t)
    for i in range(0, hi):
        assert inter.contains(i) == (s.contains(i) and t.contains(i))
        assert s.union(t).contains(i) == (s.contains(i) or t.contains(i))
