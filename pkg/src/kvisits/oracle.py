"""Exact k-Visits decision by state-space search, plus small brute-force searches.

The search state is, per task, the time left before its deadline expires and
the number of visits still owed; the current position follows from the
visits already made. Tasks with equal deadlines are interchangeable, so the
state is canonicalized by sorting within each equal-deadline group.
"""

import random
import sys
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from kvisits.core import (
    PRIMARY,
    SECONDARY,
    SINGLE,
    Deadlines,
    Entry,
    KVisitsInstance,
    OneOrTwoInstance,
    Schedule,
    as_deadlines,
    verify_k_visits,
    verify_one_or_two,
    verify_two_visits,
)
from kvisits.discretize import discretized_sequence
from kvisits.posmatch import CapExceeded, InvariantBreach, solve_brute_force, two_visits_to_pm

DEFAULT_STATE_CAP = 5_000_000

COUNTEREXAMPLE_DEADLINES = (2, 5, 6, 7, 8, 9, 10, 11)
COUNTEREXAMPLE_K = 3
# tasks named by deadline; every deadline is distinct so this is unambiguous
COUNTEREXAMPLE_SCHEDULE = (2, 2, 2, 10, 5, 6, 7, 8, 9, 5, 11, 6, 7, 10, 5, 8, 6, 9, 7, 8, 9, 11, 10, 11)


class ResourceLimitExceeded(CapExceeded):
    """The search hit its state budget before reaching a verdict."""


@dataclass(frozen=True)
class SearchConstraints:
    """Extra restrictions on admissible schedules.

    ``distinct_positions``: no task may be visited at two of these positions.
    ``sorted_first_visits``: a task's first visit may not precede the first
    visit of any task with a smaller deadline.
    """

    distinct_positions: FrozenSet[int] = frozenset()
    sorted_first_visits: bool = False

    def check(self, inst: KVisitsInstance, sched: Schedule) -> bool:
        seen = set()
        for e in sched.entries:
            if e.pos in self.distinct_positions:
                if e.task in seen:
                    return False
                seen.add(e.task)
        if self.sorted_first_visits:
            firsts = list(dict.fromkeys(e.task for e in sched.entries))
            ds = [inst.deadlines[t - 1] for t in firsts]
            if ds != sorted(ds):
                return False
        return True


NO_CONSTRAINTS = SearchConstraints()


@dataclass(frozen=True)
class Decision:
    feasible: bool
    witness: Optional[Schedule] = None
    states: int = 0

    def __bool__(self):
        return self.feasible


def _demand_ok(rem, left, dl, remaining_len) -> bool:
    """Visit ``j`` of task ``i`` is due by ``rem_i + (j-1) d_i``; the ``q``-th due date must be >= q."""
    due = []
    for r, v, d in zip(rem, left, dl):
        for j in range(v):
            x = r + j * d
            if x > remaining_len:
                break
            due.append(x)
    due.sort()
    return all(x >= q for q, x in enumerate(due, start=1))


def k_visits_decide(
    inst: KVisitsInstance,
    constraints: Optional[SearchConstraints] = None,
    state_cap: int = DEFAULT_STATE_CAP,
) -> Decision:
    """Exact decision with a witness on yes; raises :class:`ResourceLimitExceeded` at the cap.

    Depth-first, earliest deadline first, with three prunings: a task with one
    step left must go now (two such tasks kill the branch), a demand bound on
    future due dates, and a memo of dead canonical states.
    """
    c = constraints or NO_CONSTRAINTS
    d = inst.deadlines.values
    n, k = inst.n, inst.k
    total = n * k
    if n == 0:
        return Decision(True, Schedule(()))
    # tasks are sorted, so equal deadlines form contiguous groups
    groups = []
    start = 0
    for i in range(1, n + 1):
        if i == n or d[i] != d[start]:
            groups.append((start, i))
            start = i
    distinct_pos = c.distinct_positions
    rank_below = [sum(1 for x in d if x < d[i]) for i in range(n)]

    rem = list(d)
    left = [k] * n
    flag = [False] * n  # already visited at a distinct_positions slot
    path = []
    dead = set()
    budget = [state_cap]

    def canon():
        parts = []
        for s, e in groups:
            parts.append(tuple(sorted(zip(rem[s:e], left[s:e], flag[s:e]))))
        return tuple(parts)

    def first_visits_done_below(i):
        # tasks with smaller deadline are exactly indices 0..rank_below[i]-1
        return all(left[j] < k for j in range(rank_below[i]))

    def rec(pos):
        # pos = number of visits already placed
        if pos == total:
            return True
        key = canon()
        if key in dead:
            return False
        budget[0] -= 1
        if budget[0] < 0:
            raise ResourceLimitExceeded(f"state budget {state_cap} exhausted")
        urgent = [i for i in range(n) if left[i] and rem[i] == 1]
        if len(urgent) > 1:
            dead.add(key)
            return False
        if urgent:
            cands = urgent
        else:
            cands = sorted((i for i in range(n) if left[i]), key=lambda i: (rem[i], d[i], i))
        here = pos + 1
        tried = set()
        for i in cands:
            sig = (d[i], rem[i], left[i], flag[i])
            if sig in tried:
                continue
            tried.add(sig)
            if c.sorted_first_visits and left[i] == k and not first_visits_done_below(i):
                continue
            on_slot = here in distinct_pos
            if on_slot and flag[i]:
                continue
            saved = (rem[:], flag[i])
            for j in range(n):
                if left[j]:
                    rem[j] -= 1
            left[i] -= 1
            rem[i] = d[i] if left[i] else 0  # finished tasks carry no clock
            if on_slot:
                flag[i] = True
            ok = all(rem[j] >= 1 for j in range(n) if left[j]) and _demand_ok(rem, left, d, total - here)
            if ok:
                path.append(i + 1)
                if rec(pos + 1):
                    return True
                path.pop()
            rem[:] = saved[0]
            flag[i] = saved[1]
            left[i] += 1
        dead.add(key)
        return False

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, total + 200))
    try:
        found = rec(0)
    finally:
        sys.setrecursionlimit(old)
    used = state_cap - budget[0]
    if not found:
        return Decision(False, None, used)
    sched = Schedule.from_tasks(path)
    if not verify_k_visits(inst, sched) or not c.check(inst, sched):
        raise InvariantBreach("search produced a schedule that fails verification")
    return Decision(True, sched, used)


def k_visits_bfs(inst: KVisitsInstance, state_cap: int = DEFAULT_STATE_CAP) -> bool:
    """Plain layered search over raw (uncanonicalized) states, no pruning beyond expiry."""
    d = inst.deadlines.values
    n, k = inst.n, inst.k
    layer = {(tuple(d), (k,) * n)}
    seen = 0
    for _ in range(n * k):
        nxt = set()
        for rem, left in layer:
            for i in range(n):
                if not left[i]:
                    continue
                l2 = tuple(left[j] - (j == i) for j in range(n))
                r2 = tuple(0 if not l2[j] else d[j] if j == i else rem[j] - 1 for j in range(n))
                if all(r2[j] >= 1 for j in range(n) if l2[j]):
                    nxt.add((r2, l2))
        seen += len(nxt)
        if seen > state_cap:
            raise ResourceLimitExceeded(f"state budget {state_cap} exhausted")
        layer = nxt
        if not layer:
            return False
    return bool(layer) or n == 0


# ---------------------------------------------------------------------------
# the 3-visits counterexample


@dataclass(frozen=True)
class CounterexampleReport:
    schedule_verifies: bool
    distinct_discretized_infeasible: bool
    sorted_first_visits_infeasible: bool
    states: Tuple[int, int]

    @property
    def ok(self) -> bool:
        return self.schedule_verifies and self.distinct_discretized_infeasible and self.sorted_first_visits_infeasible


def counterexample_3visits(state_cap: int = DEFAULT_STATE_CAP) -> CounterexampleReport:
    """Certify the three facts about ``{2,5,...,11}`` with three visits each.

    1. the displayed schedule is feasible;
    2. no feasible schedule puts distinct tasks on all discretized positions;
    3. no feasible schedule makes its first visits in deadline order.
    """
    d = Deadlines(COUNTEREXAMPLE_DEADLINES)
    inst = KVisitsInstance(d, COUNTEREXAMPLE_K)
    task_of = {v: i + 1 for i, v in enumerate(d)}
    sched = Schedule.from_tasks([task_of[v] for v in COUNTEREXAMPLE_SCHEDULE])
    fact1 = bool(verify_k_visits(inst, sched))
    slots = frozenset(discretized_sequence(d))
    r2 = k_visits_decide(inst, SearchConstraints(distinct_positions=slots), state_cap)
    r3 = k_visits_decide(inst, SearchConstraints(sorted_first_visits=True), state_cap)
    return CounterexampleReport(fact1, not r2.feasible, not r3.feasible, (r2.states, r3.states))


# ---------------------------------------------------------------------------
# role-labelled brute force for the two-visit variants


def _role_search(deadline_of, singles: Sequence[int], doubles: Sequence[int], length: int,
                 primary_positions=None, single_positions: Optional[Dict[int, int]] = None):
    """DFS over role-labelled schedules of ``length`` positions.

    ``primary_positions`` restricts primaries to that set; ``single_positions``
    pins each single task to a position.
    """
    prim = {}
    sec = {}
    placed_single = {}
    out = [None] * (length + 1)
    dead = set()
    pinned = {p: t for t, p in (single_positions or {}).items()}

    def alive(pos):
        # every open obligation must still be satisfiable at position pos
        for t in singles:
            if t not in placed_single and deadline_of(t) < pos:
                return False
        for t in doubles:
            dl = deadline_of(t)
            if t not in prim and dl < pos:
                return False
            if t in prim and t not in sec and pos > prim[t] + dl:
                return False
        return True

    def key(pos):
        return (pos, frozenset(placed_single),
                frozenset((t, prim.get(t) if t not in sec else -1, t in sec) for t in doubles if t in prim or t in sec))

    def rec(pos):
        if pos > length:
            return True
        if not alive(pos):
            return False
        kk = key(pos)
        if kk in dead:
            return False
        options = []
        if pos in pinned:
            options.append((pinned[pos], SINGLE))
        else:
            for t in singles:
                if t not in placed_single and (single_positions is None):
                    options.append((t, SINGLE))
            for t in doubles:
                if t not in prim and (primary_positions is None or pos in primary_positions):
                    options.append((t, PRIMARY))
                if t not in sec:
                    options.append((t, SECONDARY))
        for t, role in options:
            if role == SINGLE:
                placed_single[t] = pos
            elif role == PRIMARY:
                prim[t] = pos
            else:
                sec[t] = pos
            out[pos] = (t, role)
            if rec(pos + 1):
                return True
            if role == SINGLE:
                del placed_single[t]
            elif role == PRIMARY:
                del prim[t]
            else:
                del sec[t]
        dead.add(kk)
        return False

    if not rec(1):
        return None
    return Schedule(tuple(Entry(p, t, r) for p, (t, r) in enumerate(out[1:], start=1)))


def two_visits_search(deadlines, primary_positions=None, cap: int = 7) -> Optional[Schedule]:
    """Brute-force 2-Visits with roles; optionally restrict primaries to a position set."""
    d = as_deadlines(deadlines)
    n = len(d)
    if n > cap:
        raise CapExceeded(f"role search refuses n = {n} > cap {cap}")
    s = _role_search(lambda t: d[t - 1], (), range(1, n + 1), 2 * n, primary_positions=primary_positions)
    if s is not None and not verify_two_visits(d, s):
        raise InvariantBreach("role search returned an invalid schedule")
    return s


def one_or_two_search(inst: OneOrTwoInstance, single_positions: Optional[Dict[int, int]] = None,
                      cap: int = 7) -> Optional[Schedule]:
    """Brute-force (1 or 2)-Visits; optionally pin single tasks to positions."""
    if inst.m + inst.n > cap:
        raise CapExceeded(f"role search refuses m + n = {inst.m + inst.n} > cap {cap}")
    s = _role_search(inst.deadline_of, range(1, inst.m + 1), range(inst.m + 1, inst.m + inst.n + 1),
                     inst.horizon, single_positions=single_positions)
    if s is not None and not verify_one_or_two(inst, s):
        raise InvariantBreach("role search returned an invalid schedule")
    return s


# ---------------------------------------------------------------------------
# reduction equivalence sweep


THREE_CLUSTER_DEADLINES = (1, 4, 5, 6, 6, 7, 15, 16, 18, 18, 18)


@dataclass(frozen=True)
class SweepReport:
    checked: int
    yes: int
    mismatches: Tuple[Tuple[int, ...], ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.mismatches


def pm_equiv_sweep(count: int, max_n: int, seed: int) -> SweepReport:
    """Compare the state-space oracle (k=2) with brute-force Position Matching."""
    if max_n > 6:
        raise ValueError("max_n must be at most 6")
    rng = random.Random(seed)
    pinned = [(1, 2), (2, 2), THREE_CLUSTER_DEADLINES]
    draws = pinned + [
        tuple(sorted(rng.randint(1, 2 * n) for _ in range(n)))
        for n in (rng.randint(1, max_n) for _ in range(count))
    ]
    yes = 0
    bad = []
    for dl in draws:
        d = Deadlines(dl)
        direct = k_visits_decide(KVisitsInstance(d, 2)).feasible
        pm = two_visits_to_pm(d)
        via = False
        if pm is not None:
            via = solve_brute_force(pm, cap=len(d)) is not None
        yes += direct
        if direct != via:
            bad.append(dl)
    return SweepReport(len(draws), yes, tuple(bad))
