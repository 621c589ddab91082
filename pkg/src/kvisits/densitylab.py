"""Density thresholds: constructive schedules, witness families and periodic windows."""

import hashlib
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

from kvisits.core import (
    OK,
    PRIMARY,
    SECONDARY,
    Deadlines,
    Entry,
    InstanceError,
    KVisitsInstance,
    Schedule,
    Verdict,
    Violation,
    as_deadlines,
    at_most_sqrt2_minus_half,
    density,
    verify_k_visits,
    verify_two_visits,
)
from kvisits.discretize import complement_targets, discretized_sequence
from kvisits.kernels import gap_grid_min

SQRT2 = math.sqrt(2.0)
THRESHOLD = SQRT2 - 0.5


# ---------------------------------------------------------------------------
# one visit per task


@dataclass(frozen=True)
class OneVisitOutcome:
    schedule: Optional[Schedule]
    witness: Optional[int] = None  # smallest 1-based j with d_j < j

    def __bool__(self):
        return self.schedule is not None


def one_visit_schedule(deadlines) -> OneVisitOutcome:
    """Identity order works iff ``d_j >= j`` for every ``j``."""
    d = as_deadlines(deadlines)
    for j, v in enumerate(d, start=1):
        if v < j:
            return OneVisitOutcome(None, j)
    return OneVisitOutcome(Schedule.from_tasks(range(1, len(d) + 1)))


# ---------------------------------------------------------------------------
# the sufficient condition t_i <= d_i + a_i


@dataclass(frozen=True)
class ClaimRecord:
    i: int
    d: int
    a: int
    t: int
    bound: int
    satisfied: bool


@dataclass(frozen=True)
class ClaimReport:
    records: Tuple[ClaimRecord, ...]
    first_violation: Optional[int]

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def claim_property(deadlines) -> ClaimReport:
    """Evaluate ``t_i <= d_i + a_i`` index by index on a normalized 2-Visits instance."""
    d = as_deadlines(deadlines)
    n = len(d)
    if n and d[-1] > 2 * n:
        raise InstanceError(f"deadline {d[-1]} > 2n = {2 * n}; normalize first")
    a = discretized_sequence(d)
    if not a.fits:
        raise InstanceError("instance is overfull: a_1 < 1")
    t = complement_targets(a, 2 * n)
    recs = []
    first = None
    for i in range(n):
        bound = d[i] + a[i]
        ok = t[i] <= bound
        recs.append(ClaimRecord(i + 1, d[i], a[i], t[i], bound, ok))
        if not ok and first is None:
            first = i + 1
    return ClaimReport(tuple(recs), first)


def density_schedule_2v(deadlines):
    """Primary of task ``i`` at ``a_i`` and secondary at ``t_i`` when the claim holds.

    Returns the verified :class:`Schedule`, or the :class:`ClaimReport` when the
    condition fails (which says nothing about feasibility).
    """
    rep = claim_property(deadlines)
    if not rep.ok:
        return rep
    ents = []
    for r in rep.records:
        ents += [Entry(r.a, r.i, PRIMARY), Entry(r.t, r.i, SECONDARY)]
    sched = Schedule(tuple(ents))
    verdict = verify_two_visits(deadlines, sched)
    if not verdict:
        raise AssertionError(f"constructed schedule rejected: {verdict.witness}")
    return sched


# ---------------------------------------------------------------------------
# families


def worst_case_family(j: int, dj: int) -> Deadlines:
    """``j`` copies of ``dj`` followed by ``dj`` copies of ``dj + 2j - 1``."""
    if j < 1 or dj < 2 * j - 1:
        raise InstanceError(f"need j >= 1 and dj >= 2j - 1, got j={j}, dj={dj}")
    return Deadlines([dj] * j + [dj + 2 * j - 1] * dj)


def worst_case_density(j: int, dj: int) -> Fraction:
    return Fraction(j, dj) + Fraction(dj, dj + 2 * j - 1)


def pinwheel_no_family(x: int) -> Tuple[KVisitsInstance, str]:
    """Deadlines ``{2, 3, x}`` with ``k = 6x + 1``; never schedulable."""
    if x < 2:
        raise InstanceError("x must be at least 2")
    return KVisitsInstance(Deadlines([2, 3, x]), 6 * x + 1), "no"


def divergent_family(k: int, n: int) -> Tuple[KVisitsInstance, Schedule]:
    """Deadlines ``1, 1+k, ..., 1+(n-1)k`` and the block schedule ``1^k 2^k ... n^k``."""
    if k < 1 or n < 1:
        raise InstanceError("k and n must be positive")
    inst = KVisitsInstance(Deadlines(1 + i * k for i in range(n)), k)
    return inst, Schedule.from_tasks([t for t in range(1, n + 1) for _ in range(k)])


# ---------------------------------------------------------------------------
# the two-level gap function


def gap_function(x, y):
    """``y/x + x/(x + 2y - 1)`` on ``y >= 1, x >= 2y - 1``; exact for rational input."""
    if y < 1 or x < 2 * y - 1 or x <= 0:
        raise ValueError(f"({x}, {y}) outside y >= 1, x >= 2y - 1")
    if all(isinstance(v, (int, Fraction)) for v in (x, y)):
        x, y = Fraction(x), Fraction(y)
    return y / x + x / (x + 2 * y - 1)


def optimal_line_y(x: float) -> float:
    return (SQRT2 - 1.0) / 2.0 * x + 0.5


@dataclass(frozen=True)
class GapScan:
    min_value: float
    argmin: Tuple[float, float]
    line_value: float  # f on the optimal line at x_max
    threshold: float = THRESHOLD

    @property
    def gap(self) -> float:
        return self.min_value - self.threshold


def gap_infimum_scan(x_max: float = 1e4, grid_step: float = 0.5) -> GapScan:
    """Grid minimum of the gap function plus its value on the optimal line at ``x_max``."""
    if x_max < 3:
        raise ValueError("x_max must be at least 3")
    v, x, y = gap_grid_min(x_max, grid_step)
    return GapScan(v, (x, y), float(gap_function(float(x_max), optimal_line_y(float(x_max)))))


# ---------------------------------------------------------------------------
# sampling


def sample_low_density(rng: random.Random, max_n: int, threshold: str = "sqrt2half", k: int = 2,
                       max_tries: int = 100000) -> Deadlines:
    """Rejection-sample a normalized instance (``d <= k n``) below the threshold.

    Deadlines are uniform on ``[ceil(c n), k n]`` with ``c`` drawn per instance
    from ``[0.5, 1]``; this lands near the threshold often enough that the
    filter rarely loops.
    """
    accept = _threshold_test(threshold)
    for _ in range(max_tries):
        n = rng.randint(1, max_n)
        c = rng.uniform(0.5, 1.0)
        lo = max(1, math.ceil(c * n))
        d = Deadlines(rng.randint(lo, k * n) for _ in range(n))
        if accept(density(d)):
            return d
    raise RuntimeError("rejection sampler did not converge")


def _threshold_test(threshold: str):
    if threshold == "sqrt2half":
        return at_most_sqrt2_minus_half
    if threshold == "one":
        return lambda q: q <= 1
    raise ValueError(f"unknown threshold {threshold!r}")


def instance_hash(d) -> str:
    return hashlib.sha1(",".join(map(str, as_deadlines(d))).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class SweepRow:
    instance_hash: str
    n: int
    density: Fraction
    claim_ok: bool
    scheduled_ok: bool


def density_sweep(count: int, max_n: int, seed: int, threshold: str = "sqrt2half") -> List[SweepRow]:
    """Sample ``count`` instances below the threshold and test the construction on each.

    With ``threshold="one"`` the sampler still draws 2-Visits instances; rows
    then record how often the sufficient condition holds in the gap above
    the proven bound.
    """
    rng = random.Random(seed)
    rows = []
    for _ in range(count):
        d = sample_low_density(rng, max_n, threshold)
        rep = claim_property(d)
        sched_ok = False
        if rep.ok:
            sched_ok = bool(verify_two_visits(d, density_schedule_2v(d)))
        rows.append(SweepRow(instance_hash(d), len(d), density(d), rep.ok, sched_ok))
    return rows


# ---------------------------------------------------------------------------
# periodic windows


@dataclass(frozen=True)
class StateVector:
    remaining: Tuple[int, ...]
    visits_left: Tuple[int, ...]


def state_vectors(inst: KVisitsInstance, sched: Schedule) -> Iterator[StateVector]:
    """``V(0), V(1), ...``: time to expiry and visits left after each prefix."""
    d = inst.deadlines
    rem = list(d)
    left = [inst.k] * inst.n
    yield StateVector(tuple(rem), tuple(left))
    for e in sched.entries:
        rem = [r - 1 for r in rem]
        rem[e.task - 1] = d[e.task - 1]
        left[e.task - 1] -= 1
        yield StateVector(tuple(rem), tuple(left))


@dataclass(frozen=True)
class CyclicWindow:
    p: int
    q: int
    window: Schedule  # S[p .. q-1], renumbered from position 1


def cyclic_extract(inst: KVisitsInstance, sched: Schedule) -> Optional[CyclicWindow]:
    """First repeated state ``V(p) = V(q)`` with ``1 <= p < q``, as a Pinwheel window.

    Applies only when ``m = prod(d_i)`` is below the schedule length and every
    task's last visit falls after position ``m``; otherwise returns ``None``.
    Since ``V(p) = V(q)`` forces ``S[p] = S[q]``, the window ``S[p, q-1]`` is a
    rotation of ``S[p+1, q]``.
    """
    if not verify_k_visits(inst, sched):
        raise InstanceError("schedule must be feasible")
    length = len(sched)
    m = math.prod(inst.deadlines)
    if m >= length:
        return None
    last = {}
    for e in sched.entries:
        last[e.task] = e.pos
    if any(last[t] < m + 1 for t in range(1, inst.n + 1)):
        return None
    seen = {}
    for p, v in enumerate(state_vectors(inst, sched)):
        if p == 0:
            continue
        if p > m + 1:
            break
        if v.remaining in seen:
            first = seen[v.remaining]
            tasks = sched.tasks[first - 1:p - 1]
            return CyclicWindow(first, p, Schedule.from_tasks(tasks))
        seen[v.remaining] = p
    raise AssertionError("no repeated state within m + 1 positions")


def verify_pinwheel_window(deadlines, window: Schedule) -> Verdict:
    """Check that repeating ``window`` forever meets every deadline.

    Equivalent to sliding every length-``d_i`` window over three copies: each
    cyclic gap between consecutive visits of a task must be at most ``d_i``.
    """
    d = as_deadlines(deadlines)
    tasks = window.tasks
    length = len(tasks)
    if length == 0:
        raise InstanceError("window must be non-empty")
    where = {}
    for pos, t in enumerate(tasks, start=1):
        if not 1 <= t <= len(d):
            return Verdict(False, Violation(t, pos, "unknown task"))
        where.setdefault(t, []).append(pos)
    issues = []
    for t in range(1, len(d) + 1):
        ps = where.get(t)
        if not ps:
            issues.append((math.inf, t, None, "task absent from window"))
            continue
        for prev, cur in zip(ps, ps[1:] + [ps[0] + length]):
            if cur - prev > d[t - 1]:
                pos = (prev + d[t - 1]) % length + 1
                issues.append((pos, t, pos, f"cyclic gap {cur - prev} > deadline {d[t - 1]}"))
                break
    if not issues:
        return OK
    issues.sort(key=lambda x: (x[0], x[1]))
    _, t, pos, reason = issues[0]
    return Verdict(False, Violation(t, pos, reason))
