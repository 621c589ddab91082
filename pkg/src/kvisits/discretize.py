"""Discretized sequences, cluster decomposition and complement target sets."""

from dataclasses import dataclass
from typing import List, Tuple

from kvisits.core import InstanceError, as_deadlines


@dataclass(frozen=True)
class DiscretizedSequence:
    """Latest feasible primary positions, one per (sorted) deadline.

    Overfull inputs such as ``{1, 1}`` produce non-positive leading entries;
    :attr:`fits` is False for those and no schedule exists.
    """

    positions: Tuple[int, ...]

    def __len__(self):
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def __getitem__(self, i):
        return self.positions[i]

    @property
    def fits(self) -> bool:
        return not self.positions or self.positions[0] >= 1


@dataclass(frozen=True)
class ClusterSpan:
    start_index: int  # 1-based, inclusive
    end_index: int
    start_value: int
    end_value: int

    def __len__(self):
        return self.end_index - self.start_index + 1

    def indices(self) -> range:
        """0-based slice bounds as a range."""
        return range(self.start_index - 1, self.end_index)


def discretized_sequence(deadlines) -> DiscretizedSequence:
    d = as_deadlines(deadlines).values
    if not d:
        return DiscretizedSequence(())
    a = [0] * len(d)
    a[-1] = d[-1]
    for i in range(len(d) - 2, -1, -1):
        a[i] = min(a[i + 1] - 1, d[i])
    return DiscretizedSequence(tuple(a))


def clusters(seq) -> List[ClusterSpan]:
    pos = list(seq)
    spans = []
    start = 0
    for i in range(1, len(pos) + 1):
        if i == len(pos) or pos[i] != pos[i - 1] + 1:
            spans.append(ClusterSpan(start + 1, i, pos[start], pos[i - 1]))
            start = i
    return spans


def complement_targets(seq, horizon: int) -> Tuple[int, ...]:
    """``[horizon] \\ A`` as a sorted tuple."""
    pos = set(seq)
    if pos and (max(pos) > horizon or min(pos) < 1):
        raise InstanceError(f"positions must lie in 1..{horizon}; normalize the instance first")
    return tuple(t for t in range(1, horizon + 1) if t not in pos)
