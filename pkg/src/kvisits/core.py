"""Instances, schedules, verifiers and exact density arithmetic.

Task identifiers are 1-based indices into the *sorted* deadline list.  For
(1 or 2)-Visits instances tasks ``1..m`` are the single-visit tasks and
``m+1..m+n`` the double-visit tasks, each group in sorted order.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

SINGLE = "single"
PRIMARY = "primary"
SECONDARY = "secondary"
PLAIN = "plain"
ROLES = (SINGLE, PRIMARY, SECONDARY, PLAIN)


class InstanceError(ValueError):
    """Raised for inputs that violate a type invariant."""


@dataclass(frozen=True)
class Deadlines:
    values: Tuple[int, ...]

    def __init__(self, values: Iterable[int] = ()):
        vals = []
        for v in values:
            if isinstance(v, bool) or int(v) != v:
                raise InstanceError(f"deadline {v!r} is not an integer")
            if v < 1:
                raise InstanceError(f"deadline {v} is not positive")
            vals.append(int(v))
        object.__setattr__(self, "values", tuple(sorted(vals)))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __repr__(self):
        return f"Deadlines({list(self.values)})"

    @property
    def is_simple(self) -> bool:
        return all(a != b for a, b in zip(self.values, self.values[1:]))

    def distinct(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.values)))


def as_deadlines(d) -> Deadlines:
    return d if isinstance(d, Deadlines) else Deadlines(d)


@dataclass(frozen=True)
class KVisitsInstance:
    deadlines: Deadlines
    k: int

    def __post_init__(self):
        object.__setattr__(self, "deadlines", as_deadlines(self.deadlines))
        if self.k < 1:
            raise InstanceError("k must be positive")

    @property
    def n(self) -> int:
        return len(self.deadlines)

    @property
    def horizon(self) -> int:
        return self.k * self.n


@dataclass(frozen=True)
class OneOrTwoInstance:
    single_deadlines: Deadlines
    double_deadlines: Deadlines

    def __post_init__(self):
        object.__setattr__(self, "single_deadlines", as_deadlines(self.single_deadlines))
        object.__setattr__(self, "double_deadlines", as_deadlines(self.double_deadlines))

    @property
    def m(self) -> int:
        return len(self.single_deadlines)

    @property
    def n(self) -> int:
        return len(self.double_deadlines)

    @property
    def horizon(self) -> int:
        return self.m + 2 * self.n

    def deadline_of(self, task: int) -> int:
        if 1 <= task <= self.m:
            return self.single_deadlines[task - 1]
        return self.double_deadlines[task - self.m - 1]


@dataclass(frozen=True)
class Entry:
    pos: int
    task: int
    role: str = PLAIN


@dataclass(frozen=True)
class Schedule:
    entries: Tuple[Entry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        ents = tuple(sorted(self.entries, key=lambda e: e.pos))
        for e in ents:
            if e.role not in ROLES:
                raise InstanceError(f"unknown role {e.role!r}")
        object.__setattr__(self, "entries", ents)

    @classmethod
    def from_tasks(cls, tasks: Sequence[int], role: str = PLAIN) -> "Schedule":
        return cls(tuple(Entry(i + 1, t, role) for i, t in enumerate(tasks)))

    def __len__(self):
        return len(self.entries)

    @property
    def tasks(self) -> Tuple[int, ...]:
        return tuple(e.task for e in self.entries)

    def positions_ok(self) -> bool:
        return [e.pos for e in self.entries] == list(range(1, len(self.entries) + 1))


@dataclass(frozen=True)
class Violation:
    task: Optional[int]
    position: Optional[int]
    reason: str


@dataclass(frozen=True)
class Verdict:
    feasible: bool
    witness: Optional[Violation] = None

    def __bool__(self):
        return self.feasible


OK = Verdict(True)


def _reject(task, pos, reason) -> Verdict:
    return Verdict(False, Violation(task, pos, reason))


def normalize(deadlines, k: int) -> Deadlines:
    """Drop every deadline larger than ``k * n``.

    Such a task never expires: all of its visits can go, back to back, after
    the rest of the schedule. Feasibility is unchanged.
    """
    d = as_deadlines(deadlines)
    bound = k * len(d)
    return Deadlines(v for v in d if v <= bound)


def normalize_one_or_two(inst: OneOrTwoInstance) -> OneOrTwoInstance:
    h = inst.horizon
    return OneOrTwoInstance(
        Deadlines(v for v in inst.single_deadlines if v <= h),
        Deadlines(v for v in inst.double_deadlines if v <= h),
    )


def _check_layout(sched: Schedule, length: int) -> Optional[Verdict]:
    if len(sched) != length:
        return _reject(None, None, f"schedule length {len(sched)} != {length}")
    for i, e in enumerate(sched.entries, start=1):
        if e.pos != i:
            return _reject(e.task, e.pos, f"positions must be 1..{length} without gaps or repeats")
    return None


def verify_k_visits(inst: KVisitsInstance, sched: Schedule) -> Verdict:
    """Check a plain k-Visits schedule; the earliest violation is reported."""
    bad = _check_layout(sched, inst.horizon)
    if bad is not None:
        return bad
    d = inst.deadlines
    last = {}
    count = {}
    for e in sched.entries:
        t = e.task
        if not 1 <= t <= inst.n:
            return _reject(t, e.pos, "unknown task")
        prev = last.get(t, 0)
        if e.pos - prev > d[t - 1]:
            what = "first visit" if prev == 0 else "gap since previous visit"
            return _reject(t, e.pos, f"{what} exceeds deadline {d[t - 1]}")
        count[t] = count.get(t, 0) + 1
        if count[t] > inst.k:
            return _reject(t, e.pos, f"more than {inst.k} visits")
        last[t] = e.pos
    for t in range(1, inst.n + 1):
        if count.get(t, 0) != inst.k:
            return _reject(t, None, f"visited {count.get(t, 0)} times, expected {inst.k}")
    return OK


def _earliest(issues) -> Verdict:
    if not issues:
        return OK
    issues.sort(key=lambda x: (x[0], x[1]))
    _, t, pos, reason = issues[0]
    return _reject(t, pos, reason)


def _double_visit_issues(sched, deadline_of, double_tasks):
    # primary <= d; secondary before the primary or at most d after it
    prim = {}
    sec = {}
    issues = []
    for e in sched.entries:
        if e.task not in double_tasks:
            continue
        if e.role == PRIMARY:
            if e.task in prim:
                issues.append((e.pos, e.task, e.pos, "second primary visit"))
            prim[e.task] = e.pos
        elif e.role == SECONDARY:
            if e.task in sec:
                issues.append((e.pos, e.task, e.pos, "second secondary visit"))
            sec[e.task] = e.pos
        else:
            issues.append((e.pos, e.task, e.pos, f"role {e.role!r} not allowed for a double-visit task"))
    for t in double_tasks:
        d = deadline_of(t)
        if t not in prim or t not in sec:
            missing = "primary" if t not in prim else "secondary"
            issues.append((float("inf"), t, None, f"missing {missing} visit"))
            continue
        p, s = prim[t], sec[t]
        if p > d:
            issues.append((p, t, p, f"primary visit after deadline {d}"))
        if s > p and s - p > d:
            issues.append((s, t, s, f"secondary visit more than {d} after primary"))
    return issues


def verify_two_visits(deadlines, sched: Schedule) -> Verdict:
    d = as_deadlines(deadlines)
    n = len(d)
    bad = _check_layout(sched, 2 * n)
    if bad is not None:
        return bad
    for e in sched.entries:
        if not 1 <= e.task <= n:
            return _reject(e.task, e.pos, "unknown task")
    return _earliest(_double_visit_issues(sched, lambda t: d[t - 1], set(range(1, n + 1))))


def verify_one_or_two(inst: OneOrTwoInstance, sched: Schedule) -> Verdict:
    bad = _check_layout(sched, inst.horizon)
    if bad is not None:
        return bad
    m, n = inst.m, inst.n
    seen_single = set()
    issues = []
    for e in sched.entries:
        if not 1 <= e.task <= m + n:
            return _reject(e.task, e.pos, "unknown task")
        if e.task > m:
            continue
        if e.role != SINGLE:
            issues.append((e.pos, e.task, e.pos, "single-visit task needs role 'single'"))
        elif e.task in seen_single:
            issues.append((e.pos, e.task, e.pos, "single-visit task visited twice"))
        elif e.pos > inst.single_deadlines[e.task - 1]:
            issues.append((e.pos, e.task, e.pos,
                           f"single visit after deadline {inst.single_deadlines[e.task - 1]}"))
        seen_single.add(e.task)
    for t in range(1, m + 1):
        if t not in seen_single:
            issues.append((float("inf"), t, None, "single-visit task never visited"))
    issues += _double_visit_issues(sched, inst.deadline_of, set(range(m + 1, m + n + 1)))
    return _earliest(issues)


def density(deadlines) -> Fraction:
    """Exact sum of reciprocal deadlines."""
    return sum((Fraction(1, v) for v in as_deadlines(deadlines)), Fraction(0))


def at_most_sqrt2_minus_half(q: Fraction) -> bool:
    """Exact test ``q <= sqrt(2) - 1/2`` using integer arithmetic only."""
    q = Fraction(q)
    # q + 1/2 <= sqrt 2  <=>  (2a + b)/(2b) <= sqrt 2  <=>  (2a+b)^2 <= 8 b^2 when 2a+b >= 0
    a, b = q.numerator, q.denominator
    s = 2 * a + b
    return s < 0 or s * s <= 8 * b * b


SQRT2_MINUS_HALF = 2 ** 0.5 - 0.5
