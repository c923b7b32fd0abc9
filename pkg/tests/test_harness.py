"""Spike sequences, pairing decay, norm-to-measure bounds, and the suite."""

import numpy as np
import pytest

from orlicz_kit import (DomainError, HypothesisViolation, OrliczFunction,
                        PieceSet, SimpleFunction, Tau, build_space,
                        build_spikes, derive_weight, indicator, luxemburg_norm,
                        measure, measure_convergence_bound, pairing_decay,
                        run_suite, spike_lower_bound)
from orlicz_kit.harness import demo_config, load_run_config
from orlicz_kit.intervals import IntervalSet
from orlicz_kit.operators import random_simple_function

POWER2 = OrliczFunction.power(2.0)
FAMILIES = [POWER2, OrliczFunction.power(1.5, 2.0), OrliczFunction.exp_minus(),
            OrliczFunction.power_log(2.0)]


def seg_space(depth=4):
    return build_space({"segment": {"length": 1.0, "depth": depth}})


def half_segment(space):
    return PieceSet(space, cells=IntervalSet.span(0, space.n_cells // 2))


class TestBuildSpikes:
    def test_power2_closed_form_heights(self):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 10)
        for n, (e_n, height) in enumerate(zip(seq.sets, seq.heights), start=1):
            assert measure(seq.space, e_n) == 2.0 ** (-n)
            # phi^{-1}(2^n) = 2^{n/2} for phi = x^2
            assert height == pytest.approx(2.0 ** (n / 2.0), rel=1e-12)

    @pytest.mark.parametrize("phi", FAMILIES)
    def test_unit_norms(self, phi):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), phi, 12)
        for nv in seq.norms:
            assert abs(nv - 1.0) <= 1e-8

    def test_single_spike(self):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 1)
        assert len(seq.spikes) == 1
        assert measure(seq.space, seq.sets[0]) == 0.5

    def test_atomic_start_rejected(self):
        space = build_space({"atoms": [{"id": "a", "mass": 1.0}],
                             "segment": {"length": 1.0, "depth": 2}})
        with pytest.raises(DomainError):
            build_spikes(space, PieceSet(space, atoms=frozenset({"a"})), POWER2, 3)

    def test_depth_exhaustion_reports_requirement(self):
        space = seg_space(3)
        with pytest.raises(DomainError, match="depth"):
            build_spikes(space, half_segment(space), POWER2, 30)


class TestPairingDecay:
    def test_disjoint_gives_zero(self):
        space = seg_space()
        n = space.n_cells
        seq = build_spikes(space, half_segment(space), POWER2, 6)
        other = PieceSet(space, cells=IntervalSet.span(n // 2, n))
        decay = pairing_decay(seq, other, POWER2)
        assert decay.pairings == [0.0] * 6

    def test_containing_set_attains_bound(self):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 8)
        decay = pairing_decay(seq, half_segment(space), POWER2)
        for n, (p, b) in enumerate(zip(decay.pairings, decay.bounds), start=1):
            assert p == pytest.approx(2.0 ** (-n / 2.0), rel=1e-12)
            assert p == pytest.approx(b, rel=1e-12)

    def test_bounds_strictly_decreasing(self):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 10)
        decay = pairing_decay(seq, half_segment(space), POWER2)
        assert all(a > b for a, b in zip(decay.bounds, decay.bounds[1:]))

    def test_pairing_never_beats_bound(self):
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 8)
        probe = PieceSet(space, cells=IntervalSet.span(1, 5))
        decay = pairing_decay(seq, probe, POWER2)
        for p, b in zip(decay.pairings, decay.bounds):
            assert p <= b + 1e-15

    def test_nonsuperlinear_warns(self):
        xs = np.linspace(0.0, 50.0, 26)
        nearly_linear = OrliczFunction.tabulated([(x, x * (1 + 1e-9 * x)) for x in xs[1:]])
        space = seg_space()
        seq = build_spikes(space, half_segment(space), POWER2, 4)
        with pytest.warns(UserWarning, match="superlinear"):
            pairing_decay(seq, half_segment(space), nearly_linear)


class TestSpikeLowerBound:
    def test_equality_case(self):
        space = seg_space()
        e0 = half_segment(space)
        seq = build_spikes(space, e0, POWER2, 8)
        eps0 = 0.6
        u = indicator(e0).scale(eps0)
        assert spike_lower_bound(u, seq, eps0, POWER2)
        for h in seq.spikes:
            nr = luxemburg_norm(u.lift(seq.space).mul(h), POWER2)
            assert nr.value == pytest.approx(eps0, abs=1e-8)

    def test_slack_case(self):
        space = seg_space()
        e0 = half_segment(space)
        seq = build_spikes(space, e0, POWER2, 6)
        assert spike_lower_bound(indicator(e0).scale(1.2), seq, 0.6, POWER2)

    def test_varying_symbol(self):
        space = seg_space()
        e0 = half_segment(space)
        seq = build_spikes(space, e0, POWER2, 6)
        n = space.n_cells
        u = SimpleFunction.from_descriptor(
            space, {"cells": [[0, n // 4, 0.8], [n // 4, n // 2, 1.5]]})
        assert spike_lower_bound(u, seq, 0.75, POWER2)

    def test_precondition_violation_names_piece(self):
        space = seg_space()
        e0 = half_segment(space)
        seq = build_spikes(space, e0, POWER2, 4)
        n = space.n_cells
        u = SimpleFunction.from_descriptor(space, {"cells": [[0, n // 4, 0.1]]})
        with pytest.raises(DomainError, match="eps0"):
            spike_lower_bound(u, seq, 0.5, POWER2)


class TestMeasureConvergence:
    def _weighted_space(self):
        space = build_space({
            "atoms": [{"id": "a1", "mass": 0.25}, {"id": "a2", "mass": 0.25}],
            "segment": {"length": 1.0, "depth": 3},
        })
        tau = Tau.from_descriptor({"atoms": {"a1": "a2", "a2": "a1"}})
        return space, derive_weight(space, tau)

    def test_stationary_sequence(self):
        space, w = self._weighted_space()
        f = random_simple_function(space, np.random.default_rng(3))
        pairs = measure_convergence_bound([f, f, f], f, POWER2, w, 0.5)
        assert pairs == [(0.0, 0.0)] * 3

    def test_hand_computed_spike_sequence(self):
        space, w = self._weighted_space()
        f = SimpleFunction.zero(space)
        eps = 0.25
        a = PieceSet(space, atoms=frozenset({"a1"}))         # mass 1/4
        f_seq = [f.add(indicator(a).scale(2.0 * eps * 2.0 ** (-n))) for n in range(1, 6)]
        pairs = measure_convergence_bound(f_seq, f, POWER2, w, eps)
        # n = 1: perturbation 0.25 >= eps, so the level set is exactly a1
        assert pairs[0][0] == 0.25
        # afterwards the perturbation is below eps and the set is empty
        for m, _ in pairs[1:]:
            assert m == 0.0
        for n, (m, bound) in enumerate(pairs, start=1):
            c_n = 2.0 * eps * 2.0 ** (-n)
            expected_bound = c_n * 0.5 / eps ** 2   # ||c chi_A|| = c/2, phi(eps) = eps^2
            assert bound == pytest.approx(expected_bound, rel=1e-9)
            assert m <= bound + 1e-10

    def test_random_sequences_under_identity(self):
        space, _ = self._weighted_space()
        w = derive_weight(space, Tau())
        rng = np.random.default_rng(5)
        f = random_simple_function(space, rng)
        f_seq = [f.add(random_simple_function(space, rng).scale(0.02 * 2.0 ** (-n)))
                 for n in range(1, 9)]
        pairs = measure_convergence_bound(f_seq, f, POWER2, w, 0.05)
        for m, bound in pairs:
            assert m <= bound + 1e-10

    def test_hypothesis_violation_names_piece(self):
        space = build_space({"atoms": [{"id": "a1", "mass": 0.5},
                                       {"id": "a2", "mass": 0.5}]})
        w = derive_weight(space, Tau.from_descriptor({"atoms": {"a1": "a2", "a2": "a2"}}))
        f = SimpleFunction.zero(space)
        with pytest.raises(HypothesisViolation, match="a1"):
            measure_convergence_bound([f], f, POWER2, w, 0.5)

    def test_large_norm_rejected(self):
        space, w = self._weighted_space()
        f = SimpleFunction.zero(space)
        g = indicator(PieceSet.whole(space)).scale(50.0)
        with pytest.raises(HypothesisViolation, match="> 1"):
            measure_convergence_bound([g], f, POWER2, w, 0.5)


class TestInfiniteAtomBranch:
    """Disjoint unit spikes over a constant-mass family: the pairing against
    any fixed finite set dies out exactly once the indices pass it."""

    def test_family_spikes_and_finite_pairing(self):
        space = build_space({"family": {"mass_rule": {"kind": "constant", "m": 0.25}}})
        m = 0.25
        height = 2.0  # phi^{-1}(1/m) for phi = x^2
        fixed = PieceSet(space, family=IntervalSet.span(1, 6))
        for n in range(1, 12):
            e_n = PieceSet(space, family=IntervalSet.span(n, n + 1))
            h_n = indicator(e_n).scale(height)
            assert luxemburg_norm(h_n, POWER2).value == pytest.approx(1.0, abs=1e-10)
            overlap = measure(space, fixed.intersect(e_n))
            pairing = height * float(overlap)
            if n <= 5:
                assert pairing == height * m
            else:
                assert overlap == 0 and pairing == 0.0


class TestSuite:
    def test_demo_passes(self):
        space, phi, u, tau, seed, n_max = load_run_config(demo_config())
        report = run_suite(space, phi, u, tau, seed=seed, n_max=n_max)
        assert report.failed == []
        ids = [c.check_id for c in report.checks]
        assert "closed_graph_boundedness" in ids
        sub = next(c for c in report.checks if c.check_id == "closed_graph_boundedness")
        assert sub.status == "skipped"

    def test_deterministic(self):
        space, phi, u, tau, seed, n_max = load_run_config(demo_config())
        r1 = run_suite(space, phi, u, tau, seed=seed, n_max=n_max)
        r2 = run_suite(space, phi, u, tau, seed=seed, n_max=n_max)
        assert r1.to_dict() == r2.to_dict()

    def test_non_doubling_gates_modular_check(self):
        cfg = demo_config()
        cfg["phi"] = {"family": "exp_minus"}
        space, phi, u, tau, seed, n_max = load_run_config(cfg)
        report = run_suite(space, phi, u, tau, seed=seed, n_max=8)
        gated = next(c for c in report.checks if c.check_id == "modular_at_norm_unit")
        assert gated.status == "skipped"
        assert "doubling" in gated.notes
        assert report.failed == []

    def test_segment_symbol_flagged_not_compact(self):
        cfg = demo_config()
        space, phi, u, tau, seed, n_max = load_run_config(cfg)
        report = run_suite(space, phi, u, tau, seed=seed, n_max=8)
        comp = next(c for c in report.checks
                    if c.check_id == "compact_iff_finite_atomic_nsets")
        assert comp.status == "pass"
        assert "not_compact" in comp.notes
