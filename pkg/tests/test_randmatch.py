import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvisits.kernels import MODULUS
from kvisits.posmatch import CapExceeded, PMInstance, check_matching, solve_brute_force, two_visits_to_pm
from kvisits.randmatch import (
    _FACTORS,
    PRIMITIVE_ROOT,
    PROBABLY_NO,
    YES,
    Edge,
    EWPMInstance,
    WeightedBipartiteMultigraph,
    ewpm_brute_force,
    ewpm_decide_randomized,
    multigraph_to_simple,
    pm_to_ewpm,
    solve_pm_randomized,
    transform_size,
)
from tests.test_posmatch import random_pm


def graph(n, edges):
    return WeightedBipartiteMultigraph(n, n, tuple(Edge(*e) for e in edges))


def random_multigraph(rng, max_left=4, max_weight=6):
    n = rng.randint(1, max_left)
    m = rng.randint(n, 2 * n + 2)
    edges = [(rng.randrange(n), rng.randrange(n), rng.randint(0, max_weight)) for _ in range(m)]
    return graph(n, edges)


class TestField:
    def test_factorization(self):
        prod = 1
        for q, e in _FACTORS.items():
            prod *= q ** e
        assert prod == MODULUS - 1

    def test_primitive_root(self):
        for q in _FACTORS:
            assert pow(PRIMITIVE_ROOT, (MODULUS - 1) // q, MODULUS) != 1

    @pytest.mark.parametrize("bound", [0, 1, 5, 64, 449, 1000])
    def test_transform_size(self, bound):
        size = transform_size(bound)
        assert size > bound and (MODULUS - 1) % size == 0


class TestEncoding:
    def test_two_equal(self):
        enc = pm_to_ewpm(two_visits_to_pm([2, 2]))
        assert enc.target == 2
        assert {(e.left, e.right) for e in enc.graph.edges} == {(0, 0), (1, 0), (1, 1)}
        assert all(e.weight == 1 for e in enc.graph.edges)
        assert ewpm_brute_force(enc) == Counter({2: 1})

    def test_weight_alphabet(self):
        inst = PMInstance([2, 3, 3], [4, 5, 6])
        enc = pm_to_ewpm(inst)
        assert {e.weight for e in enc.graph.edges} <= {1, 4}
        assert enc.target == 1 * 1 + 2 * 4

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(1, 6))
    def test_equivalence(self, seed, n):
        inst = random_pm(random.Random(seed), n)
        if inst is None:
            return
        enc = pm_to_ewpm(inst)
        has = ewpm_brute_force(enc)[enc.target] > 0
        assert has == (solve_brute_force(inst) is not None)


class TestGadget:
    def test_single_edge(self):
        g = multigraph_to_simple(EWPMInstance(graph(1, [(0, 0, 5)]), 5))
        assert g.graph.left_count == 2 and len(g.graph.edges) == 3
        assert ewpm_brute_force(g, cap=None) == Counter({5: 1})

    def test_parallel_pair(self):
        inst = EWPMInstance(graph(1, [(0, 0, 2), (0, 0, 7)]), 2)
        assert ewpm_brute_force(inst) == Counter({2: 1, 7: 1})
        assert ewpm_brute_force(multigraph_to_simple(inst), cap=None) == Counter({2: 1, 7: 1})

    def test_simple_output(self):
        inst = EWPMInstance(graph(2, [(0, 0, 1), (0, 0, 3), (1, 1, 0), (1, 0, 2)]), 0)
        out = multigraph_to_simple(inst).graph
        pairs = [(e.left, e.right) for e in out.edges]
        assert len(pairs) == len(set(pairs))

    def test_random_multisets(self):
        rng = random.Random(21)
        for _ in range(100):
            g = random_multigraph(rng)
            inst = EWPMInstance(g, 0)
            assert ewpm_brute_force(inst) == ewpm_brute_force(multigraph_to_simple(inst), cap=None)


class TestDecision:
    def test_two_by_two(self):
        g = graph(2, [(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 1)])
        got = [ewpm_decide_randomized(EWPMInstance(g, w), seed=0).answer for w in (2, 3, 4)]
        assert got == [YES, PROBABLY_NO, YES]

    def test_two_equal_pipeline(self):
        assert ewpm_decide_randomized(pm_to_ewpm(two_visits_to_pm([2, 2])), seed=0)

    def test_empty(self):
        empty = WeightedBipartiteMultigraph(0, 0, ())
        assert ewpm_decide_randomized(EWPMInstance(empty, 0)).answer == YES
        assert ewpm_decide_randomized(EWPMInstance(empty, 1)).answer == PROBABLY_NO

    def test_unbalanced_sides(self):
        g = WeightedBipartiteMultigraph(1, 2, (Edge(0, 0, 1),))
        assert ewpm_decide_randomized(EWPMInstance(g, 1)).answer == PROBABLY_NO

    def test_bad_edges_rejected(self):
        with pytest.raises(ValueError):
            graph(1, [(0, 1, 0)])
        with pytest.raises(ValueError):
            graph(1, [(0, 0, -1)])

    def test_matches_enumeration(self):
        rng = random.Random(9)
        for _ in range(60):
            g = random_multigraph(rng)
            weights = ewpm_brute_force(EWPMInstance(g, 0))
            top = sum(max((e.weight for e in g.edges if e.left == u), default=0) for u in range(g.left_count))
            for w in range(top + 2):
                got = ewpm_decide_randomized(EWPMInstance(g, w), seed=w)
                assert bool(got) == (weights[w] > 0)

    def test_unique_matching(self):
        # a permutation graph plus nothing else: one perfect matching
        rng = random.Random(1)
        for _ in range(20):
            n = rng.randint(1, 6)
            perm = rng.sample(range(n), n)
            ws = [rng.randint(0, 5) for _ in range(n)]
            g = graph(n, [(i, perm[i], ws[i]) for i in range(n)])
            total = sum(ws)
            for w in range(sum(ws) + 3):
                assert bool(ewpm_decide_randomized(EWPMInstance(g, w), seed=3)) == (w == total)

    def test_seed_recorded(self):
        v = ewpm_decide_randomized(EWPMInstance(graph(1, [(0, 0, 0)]), 0), seed=42, trials=3)
        assert (v.seed, v.trials, v.field_modulus) == (42, 3, MODULUS)

    def test_enumeration_cap(self):
        with pytest.raises(CapExceeded):
            ewpm_brute_force(EWPMInstance(graph(10, []), 0))


class TestSolvePM:
    def test_yes_has_certificate(self):
        inst = two_visits_to_pm([1, 4, 5, 6, 6, 7, 15, 16, 18, 18, 18])
        r = solve_pm_randomized(inst, seed=5, p_cap=None)
        assert r.answer == YES
        check_matching(inst, r.matching)

    def test_value_counts_match(self):
        inst = PMInstance([3, 3, 4, 4], [2, 5, 6, 8])
        r = solve_pm_randomized(inst, seed=0)
        if r.answer == YES:
            assert Counter(x.d for x in r.matching.triplets) == Counter(inst.deadlines)

    def test_p_cap(self):
        with pytest.raises(CapExceeded):
            solve_pm_randomized(two_visits_to_pm([3, 3, 4, 5, 6]), p_cap=1)

    def test_sweep_against_brute_force(self):
        rng = random.Random(17)
        checked = 0
        while checked < 80:
            inst = random_pm(rng, rng.randint(1, 7))
            if inst is None:
                continue
            truth = solve_brute_force(inst)
            r = solve_pm_randomized(inst, seed=checked, p_cap=None)
            assert (r.answer == YES) == (truth is not None)
            if r.answer == YES:
                check_matching(inst, r.matching)
            checked += 1
