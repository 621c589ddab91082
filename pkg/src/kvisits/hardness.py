"""The numerical-matching hardness chain as executable transformers.

NMTS -> SRNMTS -> IN3DM -> (shift) -> Position Matching. Every step is a total
function: inputs the step can already reject return :data:`TRIVIAL_NO`
instead of raising. Each problem also has an exact oracle so the chain can be
cross-checked on small inputs.
"""

import itertools
import random
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

from kvisits.core import InstanceError
from kvisits.posmatch import CapExceeded, PMInstance, solve_exact_search

DEFAULT_ORACLE_CAP = 16


class _TrivialNo:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TRIVIAL_NO"

    def __bool__(self):
        return False


TRIVIAL_NO = _TrivialNo()


def _ints(xs) -> Tuple[int, ...]:
    out = tuple(sorted(int(x) for x in xs))
    if any(x < 1 for x in out):
        raise InstanceError("all elements must be positive integers")
    return out


def _require_simple(name, xs):
    if len(set(xs)) != len(xs):
        raise InstanceError(f"{name} must be duplicate-free")


@dataclass(frozen=True)
class NMTSInstance:
    a_set: Tuple[int, ...]
    b_set: Tuple[int, ...]
    t_set: Tuple[int, ...]

    def __post_init__(self):
        for name in ("a_set", "b_set", "t_set"):
            object.__setattr__(self, name, _ints(getattr(self, name)))
        if not len(self.a_set) == len(self.b_set) == len(self.t_set):
            raise InstanceError("A, B and T must have equal length")

    @property
    def n(self) -> int:
        return len(self.a_set)


@dataclass(frozen=True)
class SRNMTSInstance:
    """Exact sums against the fixed middle set ``1..n``."""

    a_set: Tuple[int, ...]
    t_set: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_set", _ints(self.a_set))
        object.__setattr__(self, "t_set", _ints(self.t_set))
        if len(self.a_set) != len(self.t_set):
            raise InstanceError("A and T must have equal length")
        _require_simple("A", self.a_set)
        _require_simple("T", self.t_set)

    @property
    def n(self) -> int:
        return len(self.a_set)


@dataclass(frozen=True)
class IN3DMInstance:
    """Inequalities ``a + b >= t`` against the fixed middle set ``1..n``."""

    a_set: Tuple[int, ...]
    t_set: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_set", _ints(self.a_set))
        object.__setattr__(self, "t_set", _ints(self.t_set))
        if len(self.a_set) != len(self.t_set):
            raise InstanceError("A and T must have equal length")

    @property
    def n(self) -> int:
        return len(self.a_set)


@dataclass(frozen=True)
class OracleAnswer:
    yes: bool
    witness: Optional[Tuple[Tuple[int, int, int], ...]] = None  # (a, b, t) triplets

    def __bool__(self):
        return self.yes


NO = OracleAnswer(False)


# ---------------------------------------------------------------------------
# transformers


def nmts_to_srnmts(inst: NMTSInstance):
    """Pad ``B`` up to ``1..max(B)`` with forced triplets ``(3i M - s_i, s_i, 3i M)``."""
    for name in ("a_set", "b_set", "t_set"):
        _require_simple(name, getattr(inst, name))
    if inst.n == 0:
        return SRNMTSInstance((), ())
    mt = max(inst.t_set)
    if mt <= max(inst.a_set) or mt <= max(inst.b_set):
        return TRIVIAL_NO
    present = set(inst.b_set)
    missing = [s for s in range(1, max(inst.b_set) + 1) if s not in present]
    extra_a = [3 * i * mt - s for i, s in enumerate(missing, start=1)]
    extra_t = [3 * i * mt for i in range(1, len(missing) + 1)]
    return SRNMTSInstance(inst.a_set + tuple(extra_a), inst.t_set + tuple(extra_t))


def srnmts_to_in3dm(inst: SRNMTSInstance):
    """Keep ``(A, T)`` when the sums balance; then every ``>=`` is forced to ``=``."""
    n = inst.n
    if sum(inst.a_set) + n * (n + 1) // 2 != sum(inst.t_set):
        return TRIVIAL_NO
    return IN3DMInstance(inst.a_set, inst.t_set)


def in3dm_normalize(inst: IN3DMInstance) -> IN3DMInstance:
    """Add ``n`` to every element of ``A`` and ``T``."""
    n = inst.n
    return IN3DMInstance(tuple(a + n for a in inst.a_set), tuple(t + n for t in inst.t_set))


def padding_targets(p: int, n: int) -> Tuple[int, ...]:
    """``[p+n+2, 4p-2n+1]`` with every third element (offsets 2, 5, ...) left out."""
    lo, hi = p + n + 2, 4 * p - 2 * n + 1
    return tuple(x for x in range(lo, hi + 1) if (x - lo) % 3 != 2)


def in3dm_to_pm(inst: IN3DMInstance) -> PMInstance:
    """Position Matching instance whose discretized sequence is ``1..2P-n``.

    The middle set ``1..n`` is absorbed by the positions ``A`` of the new
    instance; the doubled values ``P+1..2P-n`` and the padding targets soak up
    every other position.
    """
    n = inst.n
    _require_simple("A", inst.a_set)
    _require_simple("T", inst.t_set)
    if n == 0:
        return PMInstance((), ())
    if min(inst.a_set) < n:
        raise InstanceError(f"min(A) = {min(inst.a_set)} < n = {n}; shift first")
    p = max(max(inst.a_set), max(inst.t_set))
    pad = [v for v in range(p + 1, 2 * p - n + 1) for _ in range(2)]
    return PMInstance(inst.a_set + tuple(pad), inst.t_set + padding_targets(p, n))


# ---------------------------------------------------------------------------
# oracles (exact, pruned search)


def _refuse(n, cap):
    if cap is not None and n > cap:
        raise CapExceeded(f"oracle refuses n = {n} > cap {cap}")


def _exact_sum_search(a_vals, b_vals, t_vals) -> OracleAnswer:
    """Cover ``T`` by disjoint ``a + b = t``; largest ``t`` first, memoized."""
    if len(a_vals) != len(t_vals) or len(b_vals) != len(t_vals):
        return NO
    if sum(a_vals) + sum(b_vals) != sum(t_vals):
        return NO
    a_left = Counter(a_vals)
    b_left = Counter(b_vals)
    ts = sorted(t_vals, reverse=True)
    dead = set()
    out = []

    def rec(i):
        if i == len(ts):
            return True
        key = (i, tuple(sorted(+a_left)), tuple(sorted(+b_left)))
        if key in dead:
            return False
        t = ts[i]
        for a in sorted(+a_left, reverse=True):
            b = t - a
            if a_left[a] and b_left.get(b, 0) > 0:
                a_left[a] -= 1
                b_left[b] -= 1
                out.append((a, b, t))
                if rec(i + 1):
                    return True
                out.pop()
                a_left[a] += 1
                b_left[b] += 1
        dead.add(key)
        return False

    return OracleAnswer(True, tuple(out)) if rec(0) else NO


def solve_nmts_bf(inst: NMTSInstance, cap: Optional[int] = DEFAULT_ORACLE_CAP) -> OracleAnswer:
    _refuse(inst.n, cap)
    return _exact_sum_search(inst.a_set, inst.b_set, inst.t_set)


def solve_srnmts_bf(inst: SRNMTSInstance, cap: Optional[int] = DEFAULT_ORACLE_CAP) -> OracleAnswer:
    _refuse(inst.n, cap)
    return _exact_sum_search(inst.a_set, tuple(range(1, inst.n + 1)), inst.t_set)


def solve_in3dm_bf(inst: IN3DMInstance, cap: Optional[int] = DEFAULT_ORACLE_CAP) -> OracleAnswer:
    """Largest ``t`` first; for each ``a`` use the smallest free ``b >= t - a``.

    Taking the smallest sufficient ``b`` is safe: swapping it with whatever
    larger ``b`` a solution used there keeps every inequality.
    """
    n = inst.n
    _refuse(n, cap)
    if sum(inst.a_set) + n * (n + 1) // 2 < sum(inst.t_set):
        return NO
    a_left = Counter(inst.a_set)
    b_free = [True] * (n + 1)
    ts = sorted(inst.t_set, reverse=True)
    dead = set()
    out = []

    def rec(i):
        if i == n:
            return True
        key = (tuple(sorted(+a_left)), tuple(b_free))
        if key in dead:
            return False
        t = ts[i]
        for a in sorted(+a_left, reverse=True):
            b = next((b for b in range(max(1, t - a), n + 1) if b_free[b]), None)
            if b is None:
                continue
            a_left[a] -= 1
            b_free[b] = False
            out.append((a, b, t))
            if rec(i + 1):
                return True
            out.pop()
            a_left[a] += 1
            b_free[b] = True
        dead.add(key)
        return False

    return OracleAnswer(True, tuple(out)) if rec(0) else NO


# plain permutation enumeration, for cross-checking the pruned oracles


def nmts_by_permutations(inst: NMTSInstance, cap: int = 7) -> bool:
    _refuse(inst.n, cap)
    target = Counter(inst.t_set)
    return any(Counter(a + b for a, b in zip(inst.a_set, perm)) == target
               for perm in itertools.permutations(inst.b_set))


def srnmts_by_permutations(inst: SRNMTSInstance, cap: int = 7) -> bool:
    _refuse(inst.n, cap)
    return nmts_by_permutations(NMTSInstance(inst.a_set, range(1, inst.n + 1), inst.t_set), cap)


def in3dm_by_permutations(inst: IN3DMInstance, cap: int = 7) -> bool:
    _refuse(inst.n, cap)
    ts = sorted(inst.t_set)
    for perm in itertools.permutations(range(1, inst.n + 1)):
        sums = sorted(a + b for a, b in zip(inst.a_set, perm))
        if all(s >= t for s, t in zip(sums, ts)):
            return True
    return False


# ---------------------------------------------------------------------------
# the whole chain


@dataclass(frozen=True)
class ChainStep:
    name: str
    instance: object
    verdict: Optional[bool]  # None when not checked


def run_chain(inst: NMTSInstance, verify: bool = False, cap: Optional[int] = DEFAULT_ORACLE_CAP) -> List[ChainStep]:
    """Apply every step; with ``verify`` each stage is decided by its own oracle."""
    steps = [ChainStep("nmts", inst, bool(solve_nmts_bf(inst, cap)) if verify else None)]
    cur = nmts_to_srnmts(inst)
    for name, fn, oracle in (
        ("srnmts", None, solve_srnmts_bf),
        ("in3dm", srnmts_to_in3dm, solve_in3dm_bf),
        ("in3dm-shifted", in3dm_normalize, solve_in3dm_bf),
        ("pm", in3dm_to_pm, None),
    ):
        if fn is not None and cur is not TRIVIAL_NO:
            cur = fn(cur)
        if cur is TRIVIAL_NO:
            steps.append(ChainStep(name, TRIVIAL_NO, False))
            continue
        verdict = None
        if verify:
            verdict = solve_exact_search(cur) is not None if oracle is None else bool(oracle(cur, cap))
        steps.append(ChainStep(name, cur, verdict))
    return steps


def random_nmts(rng: random.Random, n: int, max_value: int = 9, tries: int = 1000) -> NMTSInstance:
    """Random simple-set NMTS instance; about half are planted yes-instances."""
    planted = rng.random() < 0.5
    for _ in range(tries):
        a = rng.sample(range(1, max_value), n)
        b = rng.sample(range(1, max_value), n)
        if planted:
            t = [x + y for x, y in zip(a, rng.sample(b, n))]
            if len(set(t)) == n and max(t) <= max_value:
                return NMTSInstance(a, b, t)
        else:
            return NMTSInstance(a, b, rng.sample(range(2, max_value + 1), n))
    # planted draw kept colliding; fall back to an unplanted one
    return NMTSInstance(rng.sample(range(1, max_value), n), rng.sample(range(1, max_value), n),
                        rng.sample(range(2, max_value + 1), n))
