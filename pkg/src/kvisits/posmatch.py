"""Position Matching: reductions into it, cluster self-reduction and solvers.

A Position Matching instance is a deadline multiset ``D``, its discretized
sequence ``A`` and a simple target set ``T``; a solution is a perfect
three-way matching of triplets ``(d, a, t)`` with ``d >= a`` and
``d + a >= t``.
"""

import bisect
import sys
from dataclasses import dataclass, field
from itertools import groupby
from typing import Dict, List, Optional, Sequence, Tuple

from kvisits.core import (
    PRIMARY,
    SECONDARY,
    SINGLE,
    Deadlines,
    Entry,
    InstanceError,
    OneOrTwoInstance,
    Schedule,
    as_deadlines,
)
from kvisits.discretize import (
    DiscretizedSequence,
    clusters,
    complement_targets,
    discretized_sequence,
)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
PROBABLY_INFEASIBLE = "probably-infeasible"
UNDECIDED = "undecided"

DEFAULT_BRUTE_CAP = 10
DEFAULT_P_CAP = 3


class InvariantBreach(AssertionError):
    """An internal invariant failed; indicates a bug, never a legal outcome."""


class CapExceeded(RuntimeError):
    """A solver refused an instance above its configured size cap."""


@dataclass(frozen=True)
class PMInstance:
    deadlines: Deadlines
    targets: Tuple[int, ...]
    seq: DiscretizedSequence = field(init=False, compare=False)

    def __post_init__(self):
        d = as_deadlines(self.deadlines)
        t = tuple(sorted(int(x) for x in self.targets))
        if len(t) != len(d):
            raise InstanceError(f"|D| = {len(d)} but |T| = {len(t)}")
        if len(set(t)) != len(t):
            raise InstanceError("target set T has duplicates")
        object.__setattr__(self, "deadlines", d)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "seq", discretized_sequence(d))

    @property
    def n(self) -> int:
        return len(self.deadlines)


@dataclass(frozen=True)
class Triplet:
    d: int
    a: int
    t: int
    d_index: int  # 0-based into inst.deadlines
    a_index: int  # 0-based into inst.seq
    t_index: int  # 0-based into inst.targets


@dataclass(frozen=True)
class PMMatching:
    triplets: Tuple[Triplet, ...]


@dataclass(frozen=True)
class SinglePlacement:
    """Single-visit task (1-based, sorted order) -> schedule position."""

    assignments: Tuple[Tuple[int, int], ...]

    def as_dict(self) -> Dict[int, int]:
        return dict(self.assignments)


@dataclass(frozen=True)
class PMResult:
    status: str
    matching: Optional[PMMatching] = None
    clusters: Tuple[dict, ...] = ()


def check_matching(inst: PMInstance, m: PMMatching) -> PMMatching:
    """Raise :class:`InvariantBreach` unless ``m`` solves ``inst`` exactly."""
    n = inst.n
    if len(m.triplets) != n:
        raise InvariantBreach(f"matching has {len(m.triplets)} triplets, expected {n}")
    for axis in ("d_index", "a_index", "t_index"):
        if sorted(getattr(x, axis) for x in m.triplets) != list(range(n)):
            raise InvariantBreach(f"{axis} is not a permutation")
    for x in m.triplets:
        if (x.d, x.a, x.t) != (inst.deadlines[x.d_index], inst.seq[x.a_index], inst.targets[x.t_index]):
            raise InvariantBreach(f"triplet {x} disagrees with the instance")
        if x.d < x.a or x.d + x.a < x.t:
            raise InvariantBreach(f"triplet {x} violates d >= a or d + a >= t")
    return m


# ---------------------------------------------------------------------------
# reductions


def two_visits_to_pm(deadlines) -> Optional[PMInstance]:
    """Reduce a normalized 2-Visits instance; ``None`` means trivially infeasible."""
    d = as_deadlines(deadlines)
    n = len(d)
    if n and d[-1] > 2 * n:
        raise InstanceError(f"deadline {d[-1]} > 2n = {2 * n}; normalize first")
    seq = discretized_sequence(d)
    if not seq.fits:
        return None
    return PMInstance(d, complement_targets(seq, 2 * n))


def one_or_two_to_pm(inst: OneOrTwoInstance):
    """Reduce (1 or 2)-Visits to Position Matching.

    Returns ``(PMInstance, SinglePlacement)``, or ``None`` when some single
    task has no free position (or the primaries do not fit).
    """
    h = inst.horizon
    seq = discretized_sequence(inst.double_deadlines)
    if not seq.fits:
        return None
    if inst.n and seq[-1] > h:
        raise InstanceError(f"double deadline {seq[-1]} > horizon {h}; normalize first")
    taken = set(seq)
    free = [p for p in range(1, h + 1) if p not in taken]
    placed = {}
    for i in range(inst.m, 0, -1):
        k = bisect.bisect_right(free, inst.single_deadlines[i - 1]) - 1
        if k < 0:
            return None
        placed[i] = free.pop(k)
    placement = SinglePlacement(tuple(sorted(placed.items())))
    return PMInstance(inst.double_deadlines, tuple(free)), placement


def split_by_clusters(inst: PMInstance) -> List[PMInstance]:
    """One sub-instance per cluster of ``A``; sorted targets are dealt out block-wise."""
    out = []
    off = 0
    for span in clusters(inst.seq):
        size = len(span)
        sub = PMInstance(
            Deadlines(inst.deadlines.values[span.start_index - 1:span.end_index]),
            inst.targets[off:off + size],
        )
        if sub.seq.positions != inst.seq.positions[span.start_index - 1:span.end_index]:
            raise InvariantBreach("cluster is not the discretized sequence of its deadlines")
        out.append(sub)
        off += size
    return out


def merge_cluster_matchings(inst: PMInstance, parts: Sequence[PMMatching]) -> PMMatching:
    """Lift per-cluster matchings (in cluster order) back to ``inst`` indices."""
    spans = clusters(inst.seq)
    if len(spans) != len(parts):
        raise InvariantBreach("one matching per cluster expected")
    trip = []
    t_off = 0
    for span, part in zip(spans, parts):
        i_off = span.start_index - 1
        for x in part.triplets:
            trip.append(Triplet(x.d, x.a, x.t, x.d_index + i_off, x.a_index + i_off, x.t_index + t_off))
        t_off += len(span)
    return check_matching(inst, PMMatching(tuple(trip)))


# ---------------------------------------------------------------------------
# solvers


def _pairs_to_matching(inst: PMInstance, pairs) -> PMMatching:
    """``pairs`` = list of (d_index, a_index); targets follow the sorted-sum order."""
    order = sorted(pairs, key=lambda p: (inst.deadlines[p[0]] + inst.seq[p[1]], p[1]))
    trip = tuple(
        Triplet(inst.deadlines[di], inst.seq[ai], inst.targets[k], di, ai, k)
        for k, (di, ai) in enumerate(order)
    )
    return check_matching(inst, PMMatching(trip))


def _dominates(sums: List[int], targets: Sequence[int]) -> bool:
    return all(s >= t for s, t in zip(sorted(sums), targets))


def solve_simple_set(inst: PMInstance) -> Optional[PMMatching]:
    """Distinct deadlines force ``a_i = d_i``; feasible iff ``t_i <= 2 d_i``."""
    if not inst.deadlines.is_simple:
        raise InstanceError("solve_simple_set needs pairwise distinct deadlines")
    sums = [2 * d for d in inst.deadlines]
    if not _dominates(sums, inst.targets):
        return None
    return _pairs_to_matching(inst, [(i, i) for i in range(inst.n)])


def _value_slots(deadlines) -> Tuple[List[int], List[List[int]]]:
    vals, slots = [], []
    for v, grp in groupby(range(len(deadlines)), key=lambda i: deadlines[i]):
        vals.append(v)
        slots.append(list(grp))
    return vals, slots


def solve_brute_force(inst: PMInstance, cap: int = DEFAULT_BRUTE_CAP) -> Optional[PMMatching]:
    """Enumerate every D -> A assignment with ``d >= a``; check sorted sums vs targets.

    Positions are filled from the largest down, choosing among the distinct
    deadline values still available, so equal deadlines are never permuted.
    """
    n = inst.n
    if n > cap:
        raise CapExceeded(f"brute force refuses n = {n} > cap {cap}")
    if not inst.seq.fits:
        return None
    vals, slots = _value_slots(inst.deadlines)
    counts = [len(s) for s in slots]
    a = inst.seq.positions
    targets = inst.targets
    chosen = [0] * n  # value index per position

    def rec(j):
        if j < 0:
            sums = [vals[chosen[i]] + a[i] for i in range(n)]
            return _dominates(sums, targets)
        lo = bisect.bisect_left(vals, a[j])
        for v in range(lo, len(vals)):
            if counts[v]:
                counts[v] -= 1
                chosen[j] = v
                if rec(j - 1):
                    return True
                counts[v] += 1
        return False

    if not rec(n - 1):
        return None
    used = [0] * len(vals)
    pairs = []
    for i in range(n):
        v = chosen[i]
        pairs.append((slots[v][used[v]], i))
        used[v] += 1
    return _pairs_to_matching(inst, pairs)


def solve_exact_search(inst: PMInstance, max_states: int = 2_000_000) -> Optional[PMMatching]:
    """Exact depth-first search with exchange pruning and dead-state memo.

    Targets are served largest first. For the chosen position ``a`` only the
    smallest available deadline ``d >= max(a, t - a)`` is tried: any solution
    using a larger ``d`` there can swap it with that smallest one. This keeps
    the search exact while making padded chain instances run in near-linear
    time.
    """
    n = inst.n
    if not inst.seq.fits:
        return None
    vals, slots = _value_slots(inst.deadlines)
    counts = [len(s) for s in slots]
    a = inst.seq.positions
    t = inst.targets
    a_free = list(range(n))  # indices, kept sorted (a is increasing)
    dead = set()
    picks = []
    slack = [sum(inst.deadlines) + sum(a) - sum(t)]
    budget = [max_states]

    def smallest_val(bound):
        v = bisect.bisect_left(vals, bound)
        while v < len(vals) and not counts[v]:
            v += 1
        return v if v < len(vals) else -1

    def rec(step):
        if step == n:
            return True
        if slack[0] < 0:
            return False
        key = (tuple(counts), tuple(a_free))
        if key in dead:
            return False
        budget[0] -= 1
        if budget[0] < 0:
            raise CapExceeded(f"exact search exceeded {max_states} states")
        tt = t[n - 1 - step]
        top = max((vals[v] for v in range(len(vals)) if counts[v]), default=0)
        # a must satisfy t - top <= a <= top
        lo = bisect.bisect_left([a[i] for i in a_free], tt - top)
        hi = bisect.bisect_right([a[i] for i in a_free], top)
        for pos in range(hi - 1, lo - 1, -1):
            ai = a_free[pos]
            v = smallest_val(max(a[ai], tt - a[ai]))
            if v < 0:
                continue
            counts[v] -= 1
            del a_free[pos]
            gain = vals[v] + a[ai] - tt
            slack[0] -= gain
            picks.append((v, ai))
            if rec(step + 1):
                return True
            picks.pop()
            slack[0] += gain
            a_free.insert(pos, ai)
            counts[v] += 1
        dead.add(key)
        return False

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * n + 200))
    try:
        found = rec(0)
    finally:
        sys.setrecursionlimit(old)
    if not found:
        return None
    used = [0] * len(vals)
    pairs = []
    for v, ai in picks:
        pairs.append((slots[v][used[v]], ai))
        used[v] += 1
    return _pairs_to_matching(inst, pairs)


def solve_auto(
    inst: PMInstance,
    strategy: str = "auto",
    brute_cap: int = DEFAULT_BRUTE_CAP,
    p_cap: int = DEFAULT_P_CAP,
    seed: int = 0,
    trials: int = 5,
) -> PMResult:
    """Decide ``inst`` with the requested strategy.

    ``auto`` splits into clusters and per cluster uses the simple-set rule for
    distinct deadlines, the randomized route when the cluster has at most
    ``p_cap`` distinct deadlines, else brute force within ``brute_cap``, else
    reports ``undecided``. A randomized "probably no" on a cluster that brute
    force can handle is certified by brute force.
    """
    if not inst.seq.fits:
        return PMResult(INFEASIBLE)
    if strategy == "simple":
        m = solve_simple_set(inst)
        return PMResult(FEASIBLE if m else INFEASIBLE, m)
    if strategy == "brute":
        try:
            m = solve_brute_force(inst, cap=brute_cap)
        except CapExceeded:
            return PMResult(UNDECIDED)
        return PMResult(FEASIBLE if m else INFEASIBLE, m)
    if strategy == "exact":
        m = solve_exact_search(inst)
        return PMResult(FEASIBLE if m else INFEASIBLE, m)
    if strategy == "randomized":
        from kvisits.randmatch import solve_pm_randomized

        r = solve_pm_randomized(inst, seed=seed, trials=trials, p_cap=None)
        status = FEASIBLE if r.answer == "yes" else PROBABLY_INFEASIBLE
        return PMResult(status, r.matching, ({"route": "randomized", "seed": seed, "trials": trials},))
    if strategy != "auto":
        raise ValueError(f"unknown strategy {strategy!r}")

    from kvisits.randmatch import solve_pm_randomized

    parts, info = [], []
    status = FEASIBLE
    for ci, sub in enumerate(split_by_clusters(inst)):
        p = len(sub.deadlines.distinct())
        if sub.deadlines.is_simple:
            route, m = "simple", solve_simple_set(sub)
            sub_status = FEASIBLE if m else INFEASIBLE
        elif p <= p_cap:
            route = "randomized"
            r = solve_pm_randomized(sub, seed=seed + ci, trials=trials, p_cap=None)
            m = r.matching
            sub_status = FEASIBLE if m else PROBABLY_INFEASIBLE
            if m is None and sub.n <= brute_cap:
                route, m = "randomized+brute", solve_brute_force(sub, cap=brute_cap)
                if m is not None:
                    raise InvariantBreach("randomized route missed a feasible cluster")
                sub_status = INFEASIBLE
        elif sub.n <= brute_cap:
            route, m = "brute", solve_brute_force(sub, cap=brute_cap)
            sub_status = FEASIBLE if m else INFEASIBLE
        else:
            route, m, sub_status = "none", None, UNDECIDED
        info.append({"cluster": ci, "size": sub.n, "distinct": p, "route": route, "status": sub_status})
        parts.append(m)
        status = _combine(status, sub_status)
        if status == INFEASIBLE:
            break
    if status == FEASIBLE:
        return PMResult(FEASIBLE, merge_cluster_matchings(inst, parts), tuple(info))
    return PMResult(status, None, tuple(info))


_RANK = {FEASIBLE: 0, UNDECIDED: 1, PROBABLY_INFEASIBLE: 2, INFEASIBLE: 3}


def _combine(a: str, b: str) -> str:
    return a if _RANK[a] >= _RANK[b] else b


# ---------------------------------------------------------------------------
# schedules


def pm_to_schedule(
    matching: PMMatching,
    horizon: int,
    placement: Optional[SinglePlacement] = None,
    task_offset: int = 0,
) -> Schedule:
    """Primary of ``(d, a, t)`` at ``a``, secondary at ``t``, singles as placed.

    Double-visit task ids are ``task_offset + d_index + 1``.
    """
    entries = {}

    def put(pos, task, role):
        if pos in entries:
            raise InvariantBreach(f"position {pos} assigned twice")
        if not 1 <= pos <= horizon:
            raise InvariantBreach(f"position {pos} outside 1..{horizon}")
        entries[pos] = Entry(pos, task, role)

    if placement is not None:
        for task, pos in placement.assignments:
            put(pos, task, SINGLE)
    for x in matching.triplets:
        task = task_offset + x.d_index + 1
        put(x.a, task, PRIMARY)
        put(x.t, task, SECONDARY)
    if len(entries) != horizon:
        raise InvariantBreach(f"schedule covers {len(entries)} of {horizon} positions")
    return Schedule(tuple(entries.values()))


def normalize_fixpoint(deadlines, k: int) -> Deadlines:
    from kvisits.core import normalize

    d = as_deadlines(deadlines)
    while True:
        nd = normalize(d, k)
        if len(nd) == len(d):
            return nd
        d = nd


def solve_two_visits(deadlines, strategy="auto", **kw):
    """Decide a 2-Visits instance; returns ``(PMResult, Schedule | None)``.

    Tasks whose deadlines never bind are dropped first and appended, primary
    then secondary, at the end of the schedule.
    """
    d = as_deadlines(deadlines)
    kept = normalize_fixpoint(d, 2)
    inst = two_visits_to_pm(kept)
    if inst is None:
        return PMResult(INFEASIBLE), None
    res = solve_auto(inst, strategy=strategy, **kw)
    if res.status != FEASIBLE:
        return res, None
    ents = list(pm_to_schedule(res.matching, 2 * len(kept)).entries)
    pos = 2 * len(kept)
    for task in range(len(kept) + 1, len(d) + 1):
        ents += [Entry(pos + 1, task, PRIMARY), Entry(pos + 2, task, SECONDARY)]
        pos += 2
    return res, Schedule(tuple(ents))


def solve_one_or_two(inst: OneOrTwoInstance, strategy="auto", **kw):
    """Decide a (1 or 2)-Visits instance; returns ``(PMResult, Schedule | None)``."""
    cur = inst
    while True:
        h = cur.horizon
        nxt = OneOrTwoInstance(
            Deadlines(v for v in cur.single_deadlines if v <= h),
            Deadlines(v for v in cur.double_deadlines if v <= h),
        )
        if (nxt.m, nxt.n) == (cur.m, cur.n):
            break
        cur = nxt
    red = one_or_two_to_pm(cur)
    if red is None:
        return PMResult(INFEASIBLE), None
    pm, placement = red
    res = solve_auto(pm, strategy=strategy, **kw)
    if res.status != FEASIBLE:
        return res, None
    sched = pm_to_schedule(res.matching, cur.horizon, placement, task_offset=cur.m)
    ents = []
    for e in sched.entries:
        task = e.task if e.role == SINGLE else inst.m + (e.task - cur.m)
        ents.append(Entry(e.pos, task, e.role))
    pos = cur.horizon
    for task in range(cur.m + 1, inst.m + 1):
        pos += 1
        ents.append(Entry(pos, task, SINGLE))
    for j in range(cur.n + 1, inst.n + 1):
        ents += [Entry(pos + 1, inst.m + j, PRIMARY), Entry(pos + 2, inst.m + j, SECONDARY)]
        pos += 2
    return res, Schedule(tuple(ents))
