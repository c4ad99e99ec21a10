import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cachealloc.allocators import StrategyKind, allocate, round_to_integers
from cachealloc.model import BudgetTooSmallError, Objective, Workload, check_feasible
from cachealloc.oracle import (
    CriteriaMode,
    EnumerationTooLargeError,
    brute_force_optimum,
    enumerate_feasible,
    nondominated,
    pareto_front,
)


def wl(sizes, free, scans=None):
    return Workload.from_vectors(sizes, free, scans)


def product_filter(w):
    ranges = [range(1, s + 1) for s in w.sizes]
    return [p for p in itertools.product(*ranges) if sum(p) == w.budget]


class TestEnumerate:
    def test_two_files(self):
        points = [a.buffers for a in enumerate_feasible(wl((10, 30), 20))]
        assert points == [(u, 20 - u) for u in range(1, 11)]

    def test_tight_bounds(self):
        assert [a.buffers for a in enumerate_feasible(wl((1, 1, 1), 3))] == [(1, 1, 1)]
        assert [a.buffers for a in enumerate_feasible(wl((2, 2), 4))] == [(2, 2)]

    def test_surplus_memory_is_capped(self):
        assert [a.buffers for a in enumerate_feasible(wl((2, 2), 9))] == [(2, 2)]

    def test_size_guard(self):
        w = wl((10_000, 10_000), 10_000)
        with pytest.raises(EnumerationTooLargeError):
            enumerate_feasible(w)

    def test_budget_guard(self):
        w = object.__new__(Workload)
        object.__setattr__(w, "files", wl((3, 3), 2).files)
        object.__setattr__(w, "free_memory", 1)
        with pytest.raises(BudgetTooSmallError):
            enumerate_feasible(w)

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.integers(1, 8), min_size=1, max_size=4), st.data())
    def test_matches_product_filter(self, sizes, data):
        w = wl(sizes, data.draw(st.integers(len(sizes), sum(sizes) + 3)))
        got = [a.buffers for a in enumerate_feasible(w)]
        assert got == product_filter(w)  # product() is already lexicographic
        assert all(a.integral for a in enumerate_feasible(w))


class TestBruteForce:
    def test_f1_prefers_full_caching(self):
        r = brute_force_optimum(wl((10, 30), 20, (3, 1)), Objective.F1)
        assert r.optimal_value == 3.0
        assert [a.buffers for a in r.optima] == [(10, 10)]
        assert r.instances_enumerated == 10

    def test_f2(self):
        r = brute_force_optimum(wl((10, 30), 20), Objective.F2)
        assert r.optimal_value == 2.0
        assert [a.buffers for a in r.optima] == [(5, 15)]

    def test_f4(self):
        r = brute_force_optimum(wl((10, 30), 20), Objective.F4)
        assert r.optimal_value == 202.0
        assert [a.buffers for a in r.optima] == [(1, 19)]

    def test_ties_are_kept(self):
        r = brute_force_optimum(wl((5, 5), 7), Objective.F2)
        assert r.optimal_value == pytest.approx(5 / 3)
        assert [a.buffers for a in r.optima] == [(3, 4), (4, 3)]

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(2, 9), st.integers(1, 5), st.integers(2, 9), st.integers(1, 5),
        st.sampled_from(list(Objective)), st.data(),
    )
    def test_tie_completeness_under_swap(self, w_same, n_same, w_other, n_other, objective, data):
        sizes = (w_same, w_other, w_same)
        scans = (n_same, n_other, n_same)
        w = wl(sizes, data.draw(st.integers(3, sum(sizes))), scans)
        optima = {a.buffers for a in brute_force_optimum(w, objective).optima}
        assert optima == {(c, b, a) for a, b, c in optima}

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 7), min_size=1, max_size=3),
           st.lists(st.integers(1, 5), min_size=3, max_size=3),
           st.sampled_from(list(Objective)), st.data())
    def test_optimum_is_minimum(self, sizes, scans, objective, data):
        w = wl(sizes, data.draw(st.integers(len(sizes), sum(sizes))), scans[: len(sizes)])
        r = brute_force_optimum(w, objective)
        values = [objective.evaluate(w, a) for a in enumerate_feasible(w)]
        assert r.optimal_value == pytest.approx(min(values), rel=1e-12)
        for a in r.optima:
            assert check_feasible(w, a) == [] and a.integral


class TestPareto:
    @pytest.mark.parametrize("mode", list(CriteriaMode))
    def test_fixed_budget_saturates(self, mode):
        front = pareto_front(wl((10, 30), 20), mode)
        assert [a.buffers for a in front.points] == [(u, 20 - u) for u in range(1, 11)]
        assert front.criteria_mode is mode

    def test_singleton(self):
        front = pareto_front(wl((2, 2), 4), CriteriaMode.SYSTEM3)
        assert [a.buffers for a in front.points] == [(2, 2)]

    def test_filter_drops_dominated_rows(self):
        crit = np.array([[1.0, 2.0], [2.0, 2.0], [0.5, 3.0], [1.0, 2.0]])
        # row 1 is dominated by row 0; equal rows 0 and 3 do not dominate each other
        assert nondominated(crit).tolist() == [True, False, True, True]

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4)),
                    min_size=1, max_size=40))
    def test_filter_matches_pairwise_loop(self, rows):
        crit = np.array(rows, dtype=float)
        expected = [
            not any(all(o <= p for o, p in zip(other, row)) and other != row for other in rows)
            for row in rows
        ]
        assert nondominated(crit, chunk=7).tolist() == expected

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(1, 8), min_size=1, max_size=3), st.data())
    def test_membership_of_rounded_strategies(self, sizes, data):
        w = wl(sizes, data.draw(st.integers(len(sizes), sum(sizes))))
        front = {a.buffers for a in pareto_front(w, CriteriaMode.SYSTEM3).points}
        for s in StrategyKind:
            assert round_to_integers(w, allocate(w, s)).buffers in front
