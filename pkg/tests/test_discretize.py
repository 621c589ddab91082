import pytest
from hypothesis import given
from hypothesis import strategies as st

from kvisits.core import InstanceError, normalize
from kvisits.discretize import clusters, complement_targets, discretized_sequence

THREE_CLUSTER = [1, 4, 5, 6, 6, 7, 15, 16, 18, 18, 18]


@pytest.mark.parametrize(
    "d, a",
    [
        ([3, 5, 5, 7, 7, 7, 15, 15, 16], [2, 3, 4, 5, 6, 7, 14, 15, 16]),
        ([2, 4, 5, 8, 8, 10], [2, 4, 5, 7, 8, 10]),
        ([2, 4, 5, 8, 8, 10, 11, 11, 12, 12, 13, 13, 14, 14], list(range(1, 15))),
    ],
)
def test_printed_sequences(d, a):
    assert list(discretized_sequence(d)) == a


def test_overfull_does_not_fit():
    seq = discretized_sequence([1, 1])
    assert list(seq) == [0, 1] and not seq.fits


def test_cluster_spans():
    spans = clusters(discretized_sequence([3, 5, 5, 7, 7, 7, 15, 15, 16]))
    assert [(c.start_value, c.end_value) for c in spans] == [(2, 7), (14, 16)]
    assert [(c.start_index, c.end_index) for c in spans] == [(1, 6), (7, 9)]


def test_three_cluster_instance():
    seq = discretized_sequence(THREE_CLUSTER)
    assert list(seq) == [1, 3, 4, 5, 6, 7, 14, 15, 16, 17, 18]
    assert [(c.start_value, c.end_value) for c in clusters(seq)] == [(1, 1), (3, 7), (14, 18)]
    assert complement_targets(seq, 22) == (2, 8, 9, 10, 11, 12, 13, 19, 20, 21, 22)


def test_singleton_cluster():
    spans = clusters(discretized_sequence([5]))
    assert len(spans) == 1 and (spans[0].start_value, spans[0].end_value) == (5, 5)


def test_complements():
    assert complement_targets(discretized_sequence([2, 2]), 4) == (3, 4)
    assert complement_targets(discretized_sequence([4, 4, 4]), 6) == (1, 5, 6)


def test_complement_rejects_out_of_range():
    with pytest.raises(InstanceError):
        complement_targets(discretized_sequence([9]), 2)


deadline_lists = st.lists(st.integers(1, 30), min_size=1, max_size=12)


@given(deadline_lists)
def test_definition_holds(d):
    d = sorted(d)
    a = list(discretized_sequence(d))
    assert a[-1] == d[-1]
    for i in range(len(d) - 1):
        assert a[i] == min(a[i + 1] - 1, d[i])
        assert a[i] < a[i + 1]
    assert all(x <= y for x, y in zip(a, d))


@given(st.sets(st.integers(1, 40), min_size=1, max_size=12))
def test_simple_set_round_trip(s):
    assert list(discretized_sequence(s)) == sorted(s)


@given(deadline_lists)
def test_each_cluster_is_its_own_sequence(d):
    d = sorted(d)
    seq = discretized_sequence(d)
    for span in clusters(seq):
        sub = d[span.start_index - 1:span.end_index]
        assert list(discretized_sequence(sub)) == list(seq)[span.start_index - 1:span.end_index]


@given(deadline_lists)
def test_clusters_partition_and_are_maximal(d):
    seq = list(discretized_sequence(d))
    spans = clusters(seq)
    assert sum(len(s) for s in spans) == len(seq)
    for s in spans:
        vals = seq[s.start_index - 1:s.end_index]
        assert vals == list(range(s.start_value, s.end_value + 1))
    for s1, s2 in zip(spans, spans[1:]):
        assert s2.start_value - s1.end_value > 1


@given(deadline_lists)
def test_target_count_after_normalizing(d):
    d = normalize(d, 2)
    seq = discretized_sequence(d)
    if len(d) and seq.fits and seq[-1] <= 2 * len(d):
        assert len(complement_targets(seq, 2 * len(d))) == len(d)


@given(deadline_lists, st.data())
def test_monotone_in_deadlines(d, data):
    d = sorted(d)
    i = data.draw(st.integers(0, len(d) - 1))
    e = list(d)
    e[i] += data.draw(st.integers(1, 5))
    # compare position by position in sorted order
    a, b = list(discretized_sequence(d)), list(discretized_sequence(sorted(e)))
    assert all(x <= y for x, y in zip(a, b))
