import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtbounds import (
    CriticalVector,
    ErrorRateSpec,
    ProcedureSpec,
    PValueVector,
    adjusted_pvalues,
    bh_constants,
    bound_vector,
    fdp_stats,
    fdp_su_matrix,
    feasible_constants,
    rescale,
    run_procedure,
    standard_roster,
    step_down,
    step_up,
)


def cv(*values):
    return CriticalVector(np.array(values, dtype=float))


def pv(*values, truth=None):
    return PValueVector(np.array(values, dtype=float), truth=truth)


class TestStepUp:
    def test_all_ones_no_rejection(self):
        d = step_up(pv(1.0, 1.0, 1.0), cv(0.1, 0.2, 0.9))
        assert d.n_rejected == 0
        assert d.rejected == frozenset()
        assert d.cutoff_index == 0

    def test_all_zero_rejects_everything(self):
        d = step_up(pv(0.0, 0.0, 0.0), cv(0.1, 0.2, 0.9))
        assert d.n_rejected == 3

    def test_middle_cutoff(self):
        d = step_up(pv(0.01, 0.04, 0.9), cv(0.02, 0.05, 0.06))
        assert d.n_rejected == 2
        assert d.rejected == frozenset({1, 2})

    def test_thresholds_above_one_clamped(self):
        d = step_up(pv(1.0, 1.0), cv(0.5, 7.0))
        assert d.n_rejected == 2  # clamped threshold 1.0 still catches p = 1


class TestStepDown:
    def test_blocked_at_first(self):
        d = step_down(pv(0.03, 0.04, 0.9), cv(0.02, 0.05, 0.06))
        assert d.n_rejected == 0

    def test_same_input_step_up_rejects_two(self):
        d = step_up(pv(0.03, 0.04, 0.9), cv(0.02, 0.05, 0.06))
        assert d.n_rejected == 2

    def test_all_zero(self):
        d = step_down(pv(0.0, 0.0, 0.0), cv(0.01, 0.01, 0.01))
        assert d.n_rejected == 3


class TestDecisionStats:
    def test_truth_annotated(self):
        truth = np.array([False, False, True])
        d = step_up(pv(0.01, 0.02, 0.03, truth=truth), cv(0.5, 0.5, 0.5))
        assert d.n_rejected == 3
        assert d.n_false == 1
        assert d.fdp == pytest.approx(1 / 3)

    def test_fdp_stats_counting(self):
        d = step_up(pv(0.0, 0.0, 0.0), cv(0.5, 0.5, 0.5))
        v, r, fdp = fdp_stats(d, [True, True, True])
        assert (v, r, fdp) == (3, 3, 1.0)
        v, r, fdp = fdp_stats(d, [False, False, True])
        assert (v, r, fdp) == (1, 3, pytest.approx(1 / 3))

    def test_no_rejections_fdp_zero(self):
        d = step_up(pv(0.9, 0.9), cv(0.1, 0.1))
        v, r, fdp = fdp_stats(d, [True, False])
        assert (v, r, fdp) == (0, 0, 0.0)


class TestAdjusted:
    def test_unit_constants_give_sorted_pvalues(self):
        p = pv(0.7, 0.1, 0.4)
        for direction in ("su", "sd"):
            adj = adjusted_pvalues(p, cv(1.0, 1.0, 1.0), direction)
            assert np.allclose(adj.values, [0.1, 0.4, 0.7], atol=0)

    def test_zero_pvalues(self):
        adj = adjusted_pvalues(pv(0.0, 0.0), cv(0.5, 1.0), "su")
        assert adj.values.tolist() == [0.0, 0.0]

    def test_monotone_and_clipped(self):
        p = pv(0.03, 0.4, 0.9, 0.02)
        adj = adjusted_pvalues(p, cv(0.01, 0.02, 0.5, 0.9), "sd")
        assert np.all(np.diff(adj.values) >= 0)
        assert np.all(adj.values <= 1.0)

    def test_zero_constant_convention(self):
        # a zero constant contributes an infinite ratio, clipped to 1
        adj = adjusted_pvalues(pv(0.0, 0.5), cv(0.0, 1.0), "sd")
        assert adj.values.tolist() == [1.0, 1.0]

    def test_in_original_order(self):
        p = pv(0.7, 0.1, 0.4)
        adj = adjusted_pvalues(p, cv(1.0, 1.0, 1.0), "su")
        assert np.allclose(adj.in_original_order(), [0.7, 0.1, 0.4], atol=0)

    @settings(max_examples=40)
    @given(data=st.data())
    def test_consistency_with_procedure(self, data):
        """Rejection by alpha*c at any alpha equals adjusted <= alpha."""
        n = data.draw(st.integers(1, 12))
        values = data.draw(st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n))
        steps = data.draw(st.lists(st.floats(0.01, 0.5), min_size=n, max_size=n))
        c = CriticalVector(np.cumsum(steps))
        p = pv(*values)
        for direction, apply in (("su", step_up), ("sd", step_down)):
            adj = adjusted_pvalues(p, c, direction)
            for alpha in (0.01, 0.05, 0.2, 0.5, 0.8, 0.99):
                decision = apply(p, c.scaled(alpha))
                expected = int(np.sum(adj.values <= alpha))
                assert decision.n_rejected == expected


class TestProcedureProperties:
    @settings(max_examples=40)
    @given(data=st.data())
    def test_step_up_superset_of_step_down(self, data):
        n = data.draw(st.integers(1, 15))
        values = data.draw(st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n))
        steps = data.draw(st.lists(st.floats(0.0, 0.3), min_size=n, max_size=n))
        c = CriticalVector(np.minimum(np.cumsum(np.array(steps) + 1e-4), 1.0))
        p = pv(*values)
        up = step_up(p, c)
        down = step_down(p, c)
        assert down.rejected <= up.rejected

    @settings(max_examples=40)
    @given(data=st.data())
    def test_monotone_in_constants(self, data):
        n = data.draw(st.integers(1, 12))
        values = data.draw(st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n))
        steps = data.draw(st.lists(st.floats(0.0, 0.3), min_size=n, max_size=n))
        bumps = data.draw(st.lists(st.floats(0.0, 0.3), min_size=n, max_size=n))
        lo = np.cumsum(np.array(steps) + 1e-4)
        hi = np.maximum.accumulate(lo + np.array(bumps))
        p = pv(*values)
        for apply in (step_up, step_down):
            assert apply(p, CriticalVector(lo)).rejected <= apply(p, CriticalVector(hi)).rejected

    @settings(max_examples=40)
    @given(data=st.data())
    def test_permutation_equivariance(self, data):
        n = data.draw(st.integers(1, 12))
        values = np.array(data.draw(st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=n, max_size=n,
            unique=True)))
        perm = np.array(data.draw(st.permutations(range(n))))
        c = CriticalVector(np.linspace(0.05, 0.8, n))
        base = step_up(pv(*values), c)
        shuffled = step_up(pv(*values[perm]), c)
        # hypothesis j of the permuted vector is hypothesis perm[j] originally
        mapped = frozenset(int(np.flatnonzero(perm == (j - 1))[0]) + 1 for j in base.rejected)
        assert shuffled.rejected == mapped

    def test_tie_handling_stable_and_count_invariant(self):
        p1 = pv(0.05, 0.05, 0.9)
        p2 = pv(0.05, 0.9, 0.05)
        c = cv(0.04, 0.06, 0.07)
        assert step_up(p1, c).n_rejected == step_up(p2, c).n_rejected == 2
        assert step_up(p1, c).rejected == frozenset({1, 2})
        assert step_up(p2, c).rejected == frozenset({1, 3})


class TestRunProcedure:
    def test_bh95_step_up_counts(self, bh95):
        p = PValueVector(bh95)
        for q, expected in ((0.05, 9), (0.10, 9)):
            spec = ProcedureSpec(family="bh", n=15, alpha=0.5,
                                 rate=ErrorRateSpec.fdp_su(15, q))
            decision, adjusted = run_procedure(p, spec)
            assert decision.n_rejected == expected
            assert int(np.sum(adjusted.values <= 0.5)) == expected

    def test_bh95_rs_su_anomaly(self, bh95):
        """Fewer rejections at the looser level: both the constants and their
        rescaling depend on the exceedance parameter."""
        p = PValueVector(bh95)
        counts = {}
        for q in (0.05, 0.10):
            spec = ProcedureSpec(family="rs", n=15, alpha=0.5,
                                 rate=ErrorRateSpec.fdp_su(15, q))
            counts[q] = run_procedure(p, spec)[0].n_rejected
        assert counts == {0.05: 5, 0.10: 4}

    def test_bh95_by_counts(self, bh95):
        p = PValueVector(bh95)
        for q in (0.05, 0.10):
            spec = ProcedureSpec(family="by", n=15, alpha=q)
            assert run_procedure(p, spec)[0].n_rejected == 3

    def test_invalid_combinations(self):
        with pytest.raises(ValueError):
            ProcedureSpec(family="by", n=10, alpha=0.05,
                          rate=ErrorRateSpec.fdp_sd(10, 0.05))
        with pytest.raises(ValueError):
            ProcedureSpec(family="gr", n=10, alpha=0.05, modified=True)
        with pytest.raises(ValueError):
            ProcedureSpec(family="bh", n=10, alpha=0.05)  # no rate
        with pytest.raises(ValueError):
            ProcedureSpec(family="bh", n=10, alpha=1.5,
                          rate=ErrorRateSpec.fdp_su(10, 0.05))

    def test_kfwer_pipeline(self):
        p = pv(0.001, 0.002, 0.2, 0.9)
        spec = ProcedureSpec(family="rs", n=4, alpha=0.05,
                             rate=ErrorRateSpec.kfwer_sd(4, 1))
        decision, _ = run_procedure(p, spec)
        # Holm at level 0.05: thresholds 0.05/4, 0.05/3, ...
        assert decision.n_rejected == 2

    def test_modified_dominates_original(self, bh95):
        p = PValueVector(bh95)
        rate = ErrorRateSpec.fdp_su(15, 0.05)
        base = ProcedureSpec(family="bh", n=15, alpha=0.5, rate=rate)
        mod = ProcedureSpec(family="bh", n=15, alpha=0.5, rate=rate, modified=True)
        d_base, _ = run_procedure(p, base)
        d_mod, _ = run_procedure(p, mod)
        assert d_base.rejected <= d_mod.rejected

    def test_feasible_constants_modified_dominates(self):
        rate = ErrorRateSpec.fdp_su(20, 0.05)
        base = feasible_constants(ProcedureSpec(family="bh", n=20, alpha=0.5, rate=rate))
        mod = feasible_constants(ProcedureSpec(family="bh", n=20, alpha=0.5, rate=rate,
                                               modified=True))
        assert np.all(mod.values >= base.values - 1e-15)
        matrix = fdp_su_matrix(20, 0.05)
        assert np.max(bound_vector(matrix, mod)) <= 1 + 1e-9


class TestRoster:
    def test_standard_roster_shape(self):
        roster = standard_roster(10)
        assert len(roster) == 10
        names = [s.name for s in roster]
        assert names.count("FDR-BY-SU") == 1
        assert names.count("FDR-GR-SD") == 1
        assert sum("(mod)" in x for x in names) == 4
        assert len(set(names)) == 10


class TestPValueVector:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            pv(0.5, 1.2)
        with pytest.raises(ValueError):
            pv(-0.01)

    def test_truth_length_checked(self):
        with pytest.raises(ValueError):
            PValueVector(np.array([0.1, 0.2]), truth=np.array([True]))
