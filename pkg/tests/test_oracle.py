import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvisits.core import KVisitsInstance, OneOrTwoInstance, Schedule, verify_k_visits
from kvisits.discretize import discretized_sequence
from kvisits.oracle import (
    COUNTEREXAMPLE_DEADLINES,
    COUNTEREXAMPLE_K,
    ResourceLimitExceeded,
    SearchConstraints,
    counterexample_3visits,
    k_visits_bfs,
    k_visits_decide,
    one_or_two_search,
    pm_equiv_sweep,
    two_visits_search,
)
from kvisits.posmatch import CapExceeded


def all_schedules(inst):
    """Every sequence with exactly k copies of each task (tiny instances only)."""
    base = [t for t in range(1, inst.n + 1) for _ in range(inst.k)]
    for perm in set(itertools.permutations(base)):
        yield Schedule.from_tasks(perm)


class TestDecide:
    def test_two_equal(self):
        r = k_visits_decide(KVisitsInstance([2, 2], 2))
        assert r and r.witness.tasks == (1, 2, 1, 2)

    @pytest.mark.parametrize("d, k", [([2, 2, 3], 13), ([2, 3, 3], 19)])
    def test_known_no(self, d, k):
        assert not k_visits_decide(KVisitsInstance(d, k))

    def test_witness_verifies(self):
        inst = KVisitsInstance(COUNTEREXAMPLE_DEADLINES, COUNTEREXAMPLE_K)
        r = k_visits_decide(inst)
        assert r and verify_k_visits(inst, r.witness)

    def test_state_cap(self):
        with pytest.raises(ResourceLimitExceeded):
            k_visits_decide(KVisitsInstance(COUNTEREXAMPLE_DEADLINES, COUNTEREXAMPLE_K), state_cap=5)
        with pytest.raises(ResourceLimitExceeded):
            k_visits_bfs(KVisitsInstance([5, 5, 5, 5, 6, 7], 8), state_cap=5)

    def test_cap_is_a_capexceeded(self):
        assert issubclass(ResourceLimitExceeded, CapExceeded)

    def test_matches_bfs(self):
        rng = random.Random(5)
        for _ in range(300):
            n = rng.randint(1, 4)
            d = sorted(rng.randint(1, 7) for _ in range(n))
            inst = KVisitsInstance(d, rng.randint(1, 4))
            assert bool(k_visits_decide(inst)) == k_visits_bfs(inst)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 5), min_size=1, max_size=3), st.integers(1, 2))
    def test_matches_enumeration(self, d, k):
        inst = KVisitsInstance(sorted(d), k)
        truth = any(verify_k_visits(inst, s) for s in all_schedules(inst))
        assert bool(k_visits_decide(inst)) == truth


class TestConstraints:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 5), min_size=1, max_size=3), st.integers(1, 2), st.booleans())
    def test_matches_enumeration(self, d, k, use_slots):
        inst = KVisitsInstance(sorted(d), k)
        if use_slots:
            c = SearchConstraints(distinct_positions=frozenset(discretized_sequence(inst.deadlines)))
        else:
            c = SearchConstraints(sorted_first_visits=True)
        truth = any(verify_k_visits(inst, s) and c.check(inst, s) for s in all_schedules(inst))
        r = k_visits_decide(inst, c)
        assert bool(r) == truth
        if r:
            assert c.check(inst, r.witness)

    def test_constrained_yes_implies_unconstrained_yes(self):
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(1, 5)
            inst = KVisitsInstance(sorted(rng.randint(1, 9) for _ in range(n)), rng.randint(1, 3))
            c = SearchConstraints(sorted_first_visits=True)
            if k_visits_decide(inst, c):
                assert k_visits_decide(inst)

    def test_check(self):
        inst = KVisitsInstance([2, 3], 1)
        c = SearchConstraints(distinct_positions=frozenset({1, 2}), sorted_first_visits=True)
        assert c.check(inst, Schedule.from_tasks([1, 2]))
        assert not c.check(inst, Schedule.from_tasks([2, 1]))
        assert not SearchConstraints(frozenset({1, 2})).check(KVisitsInstance([2], 2), Schedule.from_tasks([1, 1]))


class TestCounterexample:
    def test_facts(self):
        rep = counterexample_3visits()
        assert rep.schedule_verifies
        assert rep.distinct_discretized_infeasible
        assert rep.sorted_first_visits_infeasible
        assert rep.ok

    def test_discretized_slots(self):
        assert list(discretized_sequence(COUNTEREXAMPLE_DEADLINES)) == [2, 5, 6, 7, 8, 9, 10, 11]


class TestRoleSearch:
    def test_two_visits(self):
        s = two_visits_search([2, 2])
        assert s is not None and s.tasks == (1, 2, 1, 2)
        assert two_visits_search([1, 1]) is None

    def test_primary_restriction(self):
        assert two_visits_search([2, 4, 4], primary_positions={1, 2, 3}) is not None
        assert two_visits_search([4, 4, 4], primary_positions={4, 5, 6}) is None

    def test_one_or_two(self):
        inst = OneOrTwoInstance([1], [3])
        assert one_or_two_search(inst) is not None
        assert one_or_two_search(inst, single_positions={1: 1}) is not None
        assert one_or_two_search(inst, single_positions={1: 2}) is None

    def test_cap(self):
        with pytest.raises(CapExceeded):
            two_visits_search(range(1, 9), cap=7)


class TestReductionSweep:
    def test_sweep(self):
        rep = pm_equiv_sweep(500, 5, seed=0)
        assert rep.ok and rep.checked == 503 and 0 < rep.yes < rep.checked

    def test_bound(self):
        with pytest.raises(ValueError):
            pm_equiv_sweep(1, 7, seed=0)
