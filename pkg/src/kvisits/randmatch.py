"""Exact-weight perfect matching: the Position Matching encoding and a randomized decider.

Position Matching becomes an exact-weight perfect matching question on a
bipartite multigraph whose left side is ``A`` and right side is ``T``. An
edge ``(a, t)`` exists once per distinct deadline value ``v`` with ``v >= a``
and ``v + a >= t``; the ``i``-th smallest value gets weight ``(n+1)**(i-1)``,
so a matching of weight ``sum(n_i * (n+1)**(i-1))`` uses value ``i`` exactly
``n_i`` times.

The decider works over GF(2**61 - 1): random coefficients per edge, the
determinant of ``M(y)`` evaluated at roots of unity, and an inverse DFT to
read off the coefficient of ``y**W``. A nonzero coefficient proves a matching
of weight ``W`` exists; a zero is wrong with probability at most
``deg / (2**61 - 1)`` per trial.
"""

from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from kvisits.kernels import MODULUS, det_batch
from kvisits.posmatch import (
    CapExceeded,
    InvariantBreach,
    PMInstance,
    PMMatching,
    Triplet,
    check_matching,
    merge_cluster_matchings,
    split_by_clusters,
)

YES = "yes"
PROBABLY_NO = "probably-no"

# p - 1 = 2 * 3^2 * 5^2 * 7 * 11 * 13 * 31 * 41 * 61 * 151 * 331 * 1321
_FACTORS = {2: 1, 3: 2, 5: 2, 7: 1, 11: 1, 13: 1, 31: 1, 41: 1, 61: 1, 151: 1, 331: 1, 1321: 1}
PRIMITIVE_ROOT = 37
MAX_EVAL_POINTS = 1 << 20


def _divisors() -> List[int]:
    divs = [1]
    for q, e in _FACTORS.items():
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)


_DIVISORS = _divisors()


def transform_size(degree_bound: int) -> int:
    """Smallest divisor of ``p - 1`` exceeding ``degree_bound``."""
    for d in _DIVISORS:
        if d > degree_bound:
            return d
    raise CapExceeded(f"degree bound {degree_bound} too large for the field")


@dataclass(frozen=True)
class Edge:
    left: int
    right: int
    weight: int
    tag: Optional[int] = None


@dataclass(frozen=True)
class WeightedBipartiteMultigraph:
    left_count: int
    right_count: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        for e in edges:
            if not (0 <= e.left < self.left_count and 0 <= e.right < self.right_count):
                raise ValueError(f"edge {e} out of range")
            if e.weight < 0:
                raise ValueError(f"edge {e} has negative weight")
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class EWPMInstance:
    graph: WeightedBipartiteMultigraph
    target: int


@dataclass(frozen=True)
class RandomizedVerdict:
    answer: str
    trials: int
    field_modulus: int
    seed: int

    def __bool__(self):
        return self.answer == YES


@dataclass(frozen=True)
class RandomizedPMResult:
    answer: str
    matching: Optional[PMMatching]
    seed: int
    trials: int
    field_modulus: int = MODULUS


def pm_to_ewpm(inst: PMInstance) -> EWPMInstance:
    """Encode ``inst``; edge tags are 0-based distinct-value indices."""
    n = inst.n
    vals = inst.deadlines.distinct()
    counts = Counter(inst.deadlines)
    edges = []
    for j, a in enumerate(inst.seq):
        for k, t in enumerate(inst.targets):
            for i, v in enumerate(vals):
                if v >= a and v + a >= t:
                    edges.append(Edge(j, k, (n + 1) ** i, i))
    target = sum(counts[v] * (n + 1) ** i for i, v in enumerate(vals))
    return EWPMInstance(WeightedBipartiteMultigraph(n, n, tuple(edges)), target)


def multigraph_to_simple(inst: EWPMInstance) -> EWPMInstance:
    """Replace every edge ``u - v`` of weight ``w`` by a path ``u - x1 - x2 - v``.

    ``x1`` is a fresh right vertex and ``x2`` a fresh left vertex; only the
    first edge carries the weight. Either both outer edges or the middle edge
    are matched, so perfect matchings and their weights correspond exactly.
    """
    g = inst.graph
    ne = len(g.edges)
    edges = []
    for idx, e in enumerate(g.edges):
        x1 = g.right_count + idx
        x2 = g.left_count + idx
        edges.append(Edge(e.left, x1, e.weight, e.tag))
        edges.append(Edge(x2, x1, 0))
        edges.append(Edge(x2, e.right, 0))
    return EWPMInstance(WeightedBipartiteMultigraph(g.left_count + ne, g.right_count + ne, tuple(edges)), inst.target)


def ewpm_brute_force(inst: EWPMInstance, cap: Optional[int] = 9) -> Counter:
    """Weight multiset over all perfect matchings (each edge set counted once)."""
    g = inst.graph
    if cap is not None and g.left_count > cap:
        raise CapExceeded(f"left side {g.left_count} > cap {cap}")
    out = Counter()
    if g.left_count != g.right_count:
        return out
    adj = [[] for _ in range(g.left_count)]
    for e in g.edges:
        adj[e.left].append((e.right, e.weight))
    order = sorted(range(g.left_count), key=lambda u: len(adj[u]))
    used = [False] * g.right_count

    def rec(i, w):
        if i == len(order):
            out[w] += 1
            return
        for v, ew in adj[order[i]]:
            if not used[v]:
                used[v] = True
                rec(i + 1, w + ew)
                used[v] = False

    rec(0, 0)
    return out


def _degree_bound(g: WeightedBipartiteMultigraph) -> Optional[int]:
    """Sum over rows of the largest weight; ``None`` if some row is empty."""
    top = [-1] * g.left_count
    for e in g.edges:
        top[e.left] = max(top[e.left], e.weight)
    if any(w < 0 for w in top):
        return None
    return sum(top)


def _coefficient(g, target, size, omega, rng) -> int:
    coefs = rng.integers(1, MODULUS, size=len(g.edges), dtype=np.uint64)
    pts = [1] * size
    for j in range(1, size):
        pts[j] = pts[j - 1] * omega % MODULUS
    rows = [e.left for e in g.edges]
    cols = [e.right for e in g.edges]
    weights = [e.weight for e in g.edges]
    vals = det_batch(g.left_count, rows, cols, weights, coefs, np.array(pts, dtype=np.uint64))
    # c_W = N^{-1} * sum_j v_j * omega^{-jW}
    step = pow(omega, (MODULUS - 1 - target % size) % (MODULUS - 1), MODULUS)
    acc, tw = 0, 1
    for v in vals.tolist():
        acc = (acc + v * tw) % MODULUS
        tw = tw * step % MODULUS
    return acc * pow(size, MODULUS - 2, MODULUS) % MODULUS


def ewpm_decide_randomized(inst: EWPMInstance, seed: int = 0, trials: int = 5, salt: int = 0) -> RandomizedVerdict:
    """One-sided randomized test for a perfect matching of weight exactly ``target``.

    ``salt`` separates the random streams of repeated calls under one seed.
    """
    g = inst.graph
    no = RandomizedVerdict(PROBABLY_NO, trials, MODULUS, seed)
    if g.left_count != g.right_count or inst.target < 0:
        return no
    if g.left_count == 0:
        return RandomizedVerdict(YES if inst.target == 0 else PROBABLY_NO, trials, MODULUS, seed)
    bound = _degree_bound(g)
    if bound is None or inst.target > bound:
        return no
    size = transform_size(bound)
    if size > MAX_EVAL_POINTS:
        raise CapExceeded(f"{size} evaluation points exceed the budget {MAX_EVAL_POINTS}")
    omega = pow(PRIMITIVE_ROOT, (MODULUS - 1) // size, MODULUS)
    for trial in range(trials):
        rng = np.random.default_rng([seed, salt, trial])
        if _coefficient(g, inst.target, size, omega, rng):
            return RandomizedVerdict(YES, trials, MODULUS, seed)
    return no


def _extract(inst: EWPMInstance, seed: int, trials: int) -> List[Edge]:
    """Fix each left vertex to one edge, keeping the first choice that stays yes."""
    g = inst.graph
    edges = list(g.edges)
    salt = 1
    for u in range(g.left_count):
        mine = [e for e in edges if e.left == u]
        rest = [e for e in edges if e.left != u]
        for e in mine:
            trial_graph = WeightedBipartiteMultigraph(g.left_count, g.right_count, tuple(rest + [e]))
            salt += 1
            if ewpm_decide_randomized(EWPMInstance(trial_graph, inst.target), seed, trials, salt):
                edges = rest + [e]
                break
        else:
            raise InvariantBreach(f"no edge of left vertex {u} survives re-testing")
    return sorted(edges, key=lambda e: e.left)


def _to_pm_matching(inst: PMInstance, chosen: List[Edge]) -> PMMatching:
    n = inst.n
    vals = inst.deadlines.distinct()
    counts = Counter(e.tag for e in chosen)
    for i, v in enumerate(vals):
        if counts.get(i, 0) != inst.deadlines.values.count(v):
            raise InvariantBreach(f"value {v} used {counts.get(i, 0)} times")
    if sorted(e.right for e in chosen) != list(range(n)):
        raise InvariantBreach("extracted edges are not a perfect matching")
    first = {}
    for idx, v in enumerate(inst.deadlines):
        first.setdefault(v, idx)
    used = Counter()
    trip = []
    for e in chosen:
        v = vals[e.tag]
        di = first[v] + used[v]
        used[v] += 1
        trip.append(Triplet(v, inst.seq[e.left], inst.targets[e.right], di, e.left, e.right))
    return check_matching(inst, PMMatching(tuple(trip)))


def solve_pm_randomized(
    inst: PMInstance, seed: int = 0, trials: int = 5, p_cap: Optional[int] = 3
) -> RandomizedPMResult:
    """Decide ``inst`` cluster by cluster; every yes carries a validated matching."""
    if not inst.seq.fits:
        return RandomizedPMResult(PROBABLY_NO, None, seed, trials)
    parts = []
    for ci, sub in enumerate(split_by_clusters(inst)):
        p = len(sub.deadlines.distinct())
        if p_cap is not None and p > p_cap:
            raise CapExceeded(f"cluster {ci} has {p} distinct deadlines > p-cap {p_cap}")
        enc = pm_to_ewpm(sub)
        sub_seed = seed * 1_000_003 + ci
        if not ewpm_decide_randomized(enc, sub_seed, trials):
            return RandomizedPMResult(PROBABLY_NO, None, seed, trials)
        chosen = _extract(enc, sub_seed, trials)
        if sum(e.weight for e in chosen) != enc.target:
            raise InvariantBreach("extracted matching has the wrong weight")
        parts.append(_to_pm_matching(sub, chosen))
    return RandomizedPMResult(YES, merge_cluster_matchings(inst, parts), seed, trials)
