import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kvisits.core import InstanceError
from kvisits.hardness import (
    TRIVIAL_NO,
    IN3DMInstance,
    NMTSInstance,
    SRNMTSInstance,
    in3dm_by_permutations,
    in3dm_normalize,
    in3dm_to_pm,
    nmts_by_permutations,
    nmts_to_srnmts,
    padding_targets,
    random_nmts,
    run_chain,
    solve_in3dm_bf,
    solve_nmts_bf,
    solve_srnmts_bf,
    srnmts_by_permutations,
    srnmts_to_in3dm,
)
from kvisits.posmatch import CapExceeded, solve_brute_force


class TestNmtsStep:
    def test_worked_example(self):
        out = nmts_to_srnmts(NMTSInstance([1, 2], [1, 3], [2, 5]))
        assert out == SRNMTSInstance([1, 2, 13], [2, 5, 15])
        assert solve_nmts_bf(NMTSInstance([1, 2], [1, 3], [2, 5]))
        assert solve_srnmts_bf(out)

    def test_full_middle_set_is_identity(self):
        out = nmts_to_srnmts(NMTSInstance([1, 2], [1, 2], [3, 4]))
        assert out == SRNMTSInstance([1, 2], [3, 4])

    def test_small_max_t_is_trivial_no(self):
        assert nmts_to_srnmts(NMTSInstance([1, 2], [1, 5], [4, 5])) is TRIVIAL_NO
        assert nmts_to_srnmts(NMTSInstance([1, 6], [1, 2], [4, 6])) is TRIVIAL_NO

    def test_duplicates_rejected(self):
        with pytest.raises(InstanceError):
            nmts_to_srnmts(NMTSInstance([1, 1], [1, 2], [3, 4]))


class TestSrnmtsStep:
    def test_balanced_passes(self):
        assert srnmts_to_in3dm(SRNMTSInstance([1, 2], [2, 4])) == IN3DMInstance([1, 2], [2, 4])

    def test_unbalanced_is_trivial_no(self):
        assert srnmts_to_in3dm(SRNMTSInstance([1, 2], [2, 5])) is TRIVIAL_NO

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 5), st.randoms(use_true_random=False))
    def test_balanced_preserves_verdict(self, n, rnd):
        a = rnd.sample(range(1, 12), n)
        t = [x + b for x, b in zip(a, rnd.sample(range(1, n + 1), n))]
        if rnd.random() < 0.5:  # perturb while keeping the sum
            i, j = rnd.sample(range(n), 2) if n > 1 else (0, 0)
            t[i] += 1
            t[j] -= 1
        if len(set(t)) < n or min(t) < 1:
            return
        s = SRNMTSInstance(a, t)
        out = srnmts_to_in3dm(s)
        assert out is not TRIVIAL_NO
        assert bool(solve_srnmts_bf(s)) == bool(solve_in3dm_bf(out))


class TestShift:
    def test_shift(self):
        assert in3dm_normalize(IN3DMInstance([1, 2], [2, 4])) == IN3DMInstance([3, 4], [4, 6])

    def test_shift_twice(self):
        once = in3dm_normalize(IN3DMInstance([1, 2], [2, 4]))
        twice = in3dm_normalize(once)
        assert bool(solve_in3dm_bf(once)) == bool(solve_in3dm_bf(twice))
        assert min(twice.a_set) >= twice.n

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 6), st.randoms(use_true_random=False))
    def test_shift_preserves_verdict(self, n, rnd):
        inst = IN3DMInstance(rnd.sample(range(1, 15), n), rnd.sample(range(2, 20), n))
        assert bool(solve_in3dm_bf(inst)) == bool(solve_in3dm_bf(in3dm_normalize(inst)))


class TestToPositionMatching:
    def test_worked_example(self):
        pm = in3dm_to_pm(IN3DMInstance([3, 4], [4, 6]))
        assert list(pm.deadlines) == [3, 4, 7, 7, 8, 8, 9, 9, 10, 10]
        assert pm.targets == (4, 6, 10, 11, 13, 14, 16, 17, 19, 20)
        assert list(pm.seq) == list(range(1, 11))

    def test_padding_listing(self):
        assert padding_targets(6, 2) == (10, 11, 13, 14, 16, 17, 19, 20)

    @pytest.mark.parametrize("p, n", [(6, 2), (10, 3), (31, 7)])
    def test_padding_count(self, p, n):
        assert len(padding_targets(p, n)) == 2 * p - 2 * n

    def test_requires_shift(self):
        with pytest.raises(InstanceError):
            in3dm_to_pm(IN3DMInstance([1, 2], [2, 4]))

    @settings(max_examples=80, deadline=None)
    @given(st.integers(1, 5), st.randoms(use_true_random=False))
    def test_structure(self, n, rnd):
        inst = in3dm_normalize(IN3DMInstance(rnd.sample(range(1, 12), n), rnd.sample(range(2, 16), n)))
        pm = in3dm_to_pm(inst)
        p = max(max(inst.a_set), max(inst.t_set))
        assert pm.n == 2 * p - n
        assert list(pm.seq) == list(range(1, 2 * p - n + 1))
        assert max(list(pm.deadlines).count(v) for v in set(pm.deadlines)) <= 2


class TestOracles:
    def test_nmts(self):
        r = solve_nmts_bf(NMTSInstance([1, 2], [1, 2], [2, 4]))
        assert r and sorted(r.witness) == [(1, 1, 2), (2, 2, 4)]

    def test_srnmts(self):
        r = solve_srnmts_bf(SRNMTSInstance([1, 3], [2, 5]))
        assert r and sorted(r.witness) == [(1, 1, 2), (3, 2, 5)]

    def test_in3dm(self):
        r = solve_in3dm_bf(IN3DMInstance([3, 4], [4, 6]))
        assert r and all(a + b >= t for a, b, t in r.witness)

    def test_cap(self):
        with pytest.raises(CapExceeded):
            solve_nmts_bf(NMTSInstance(range(1, 9), range(1, 9), range(2, 10)), cap=7)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 5), st.randoms(use_true_random=False))
    def test_pruned_matches_permutations(self, n, rnd):
        a, b = rnd.sample(range(1, 9), n), rnd.sample(range(1, 9), n)
        t = rnd.sample(range(2, 14), n) if rnd.random() < 0.5 else [x + y for x, y in zip(a, rnd.sample(b, n))]
        nm = NMTSInstance(a, b, t)
        assert bool(solve_nmts_bf(nm)) == nmts_by_permutations(nm)
        sr = SRNMTSInstance(a, rnd.sample(range(2, 14), n))
        assert bool(solve_srnmts_bf(sr)) == srnmts_by_permutations(sr)
        ind = IN3DMInstance(a, sr.t_set)
        assert bool(solve_in3dm_bf(ind)) == in3dm_by_permutations(ind)

    def test_witness_sums(self):
        rng = random.Random(4)
        for _ in range(50):
            nm = random_nmts(rng, rng.randint(1, 4))
            r = solve_nmts_bf(nm)
            if r:
                assert sorted(x[0] for x in r.witness) == list(nm.a_set)
                assert sorted(x[1] for x in r.witness) == list(nm.b_set)
                assert sorted(x[2] for x in r.witness) == list(nm.t_set)
                assert all(a + b == t for a, b, t in r.witness)


def test_padded_triplets_are_forced():
    rng = random.Random(8)
    seen = 0
    while seen < 30:
        nm = random_nmts(rng, rng.randint(1, 4))
        sr = nmts_to_srnmts(nm)
        if sr is TRIVIAL_NO:
            continue
        r = solve_srnmts_bf(sr)
        if not r:
            continue
        mt = max(nm.t_set)
        for a, b, t in r.witness:
            if t > mt:  # padded target 3i*mt pairs with its own padded element
                assert t % (3 * mt) == 0 and a == t - b and b not in nm.b_set
        seen += 1


def test_chain_on_worked_example():
    steps = run_chain(NMTSInstance([1, 2], [1, 3], [2, 5]), verify=True)
    assert [s.name for s in steps] == ["nmts", "srnmts", "in3dm", "in3dm-shifted", "pm"]
    assert all(s.verdict for s in steps)


def test_chain_small_sweep_with_brute_force_end():
    # sizes where plain brute force on the final instance is still affordable
    rng = random.Random(2)
    hits = 0
    for _ in range(300):
        nm = random_nmts(rng, rng.randint(1, 2), max_value=4)
        steps = run_chain(nm, verify=True)
        pm = steps[-1].instance
        if pm is TRIVIAL_NO or pm.n > 10:
            continue
        assert (solve_brute_force(pm) is not None) == steps[0].verdict
        hits += 1
    assert hits > 0
