from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from neighbor_splice.core import (
    BOS,
    EOS,
    MASK,
    ExpandedNeighborSet,
    SpliceAction,
    TokenSequence,
    Vocabulary,
    check_non_interleaving,
    ginsert,
    replay,
)
from neighbor_splice.errors import NoSuchNeighbor, SpliceIndexError

from .helpers import action_lists, ids, nset


def test_ginsert_into_empty_canvas():
    assert ginsert((), (0, 1, 1, 1, 2), nset("a b")) == ids("a b")


def test_ginsert_pure_insertion():
    assert ginsert(ids("a b"), (1, 2, 2, 1, 1), nset("a b", "c")) == ids("a c b")


def test_ginsert_replacement():
    assert ginsert(ids("a x y b"), (1, 4, 2, 1, 1), nset("a b", "c")) == ids("a c b")


def test_ginsert_accepts_splice_action_and_token_sequence():
    canvas = TokenSequence(ids("a b"))
    act = SpliceAction(1, 2, 2, 1, 1)
    assert ginsert(canvas, act, nset("a b", "c")) == ids("a c b")
    assert canvas.tokens == ids("a b")


@pytest.mark.parametrize("action", [
    (0, 0, 1, 1, 1),   # i == j
    (2, 3, 1, 1, 1),   # j beyond M+1 for M=1
    (-1, 1, 1, 1, 1),
    (0, 1, 1, 2, 1),   # k > l
    (0, 1, 1, 1, 3),   # l beyond neighbor
    (0, 1, 1, 0, 1),
])
def test_ginsert_rejects_bad_indices(action):
    with pytest.raises(SpliceIndexError):
        ginsert(ids("a"), action, nset("a b"))


def test_ginsert_unknown_neighbor():
    with pytest.raises(NoSuchNeighbor):
        ginsert((), (0, 1, 3, 1, 1), nset("a", "b"))
    with pytest.raises(NoSuchNeighbor):
        ginsert((), (0, 1, 0, 1, 1), nset("a"))


def test_replay_examples():
    canvas, trace = replay([], nset("a"))
    assert canvas == () and trace.labels == ()
    canvas, trace = replay([(0, 1, 1, 1, 2)], nset("a b"))
    assert canvas == ids("a b") and trace.labels == (1, 1)
    canvas, trace = replay([(0, 1, 1, 1, 2), (1, 2, 2, 1, 1)], nset("a b", "c"))
    assert canvas == ids("a c b") and trace.labels == (1, 2, 1)
    assert check_non_interleaving(trace)


def test_replay_reports_failing_ordinal():
    with pytest.raises(SpliceIndexError) as info:
        replay([(0, 1, 1, 1, 1), (5, 6, 1, 1, 1)], nset("a"))
    assert info.value.ordinal == 2


@pytest.mark.parametrize("labels, expected", [
    ([1, 2, 1], True),
    ([1, 2, 1, 2], False),
    ([1, 1, 2, 2, 3], True),
    ([], True),
    ([1, 2, 3, 2, 1], True),
    ([1, 2, 2, 3, 1, 3], False),
])
def test_check_non_interleaving(labels, expected):
    assert check_non_interleaving(labels) is expected


def _interleaves_naive(labels):
    n = len(labels)
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for d in range(c + 1, n):
                    if labels[a] == labels[c] != labels[b] == labels[d]:
                        return True
    return False


@given(st.lists(st.integers(1, 3), max_size=9))
def test_non_interleaving_matches_definition(labels):
    assert check_non_interleaving(labels) is not _interleaves_naive(labels)


NEIGHBORS = ExpandedNeighborSet.of((3, 4, 5, 3), (6,), (4, 4, 7))


@given(action_lists(NEIGHBORS))
def test_replayed_traces_never_interleave(actions):
    canvas, trace = replay(actions, NEIGHBORS)
    assert len(trace) == len(canvas)
    assert check_non_interleaving(trace)


@given(st.data())
def test_ginsert_length_and_pure_insert_multiset(data):
    canvas = tuple(data.draw(st.lists(st.integers(3, 6), max_size=6)))
    n = data.draw(st.integers(1, len(NEIGHBORS)))
    T = len(NEIGHBORS.neighbor(n))
    k = data.draw(st.integers(1, T))
    l = data.draw(st.integers(k, T))
    i = data.draw(st.integers(0, len(canvas)))
    j = data.draw(st.integers(i + 1, len(canvas) + 1))
    out = ginsert(canvas, (i, j, n, k, l), NEIGHBORS)
    assert len(out) == i + (l - k + 1) + (len(canvas) - j + 1)
    pure = ginsert(canvas, (i, i + 1, n, k, l), NEIGHBORS)
    assert not Counter(canvas) - Counter(pure)


def test_token_sequence_padding_invariants():
    TokenSequence((BOS, 5, EOS), padded=True)
    with pytest.raises(ValueError):
        TokenSequence((5, EOS), padded=True)
    with pytest.raises(ValueError):
        TokenSequence((BOS, EOS, 5, EOS), padded=True)
    with pytest.raises(ValueError):
        TokenSequence((), padded=True)
    with pytest.raises(ValueError):
        TokenSequence((-1,))


def test_vocabulary_is_first_seen_with_reserved_specials():
    vocab = Vocabulary(["b", "a", "b"])
    assert (vocab["<s>"], vocab["</s>"], vocab["<mask>"]) == (BOS, EOS, MASK)
    assert vocab.encode(["a", "b", "c"]) == (4, 3, 5)
    assert vocab.decode([3, 4, 5]) == ["b", "a", "c"]
    with pytest.raises(KeyError):
        vocab.encode(["zzz"], grow=False)


def test_neighbor_set_rejects_empty_and_bad_origin():
    with pytest.raises(ValueError):
        ExpandedNeighborSet.of((), (3,))
    with pytest.raises(ValueError):
        ExpandedNeighborSet(((3,),), ("nonsense",))
    assert nset("a b", "c").token_types() == {3, 4, 5}


def test_splice_action_alternatives_do_not_affect_equality():
    assert SpliceAction(0, 1, 1, 1, 1, ((1, 1, 1),)) == SpliceAction(0, 1, 1, 1, 1)
    assert list(SpliceAction(0, 1, 2, 3, 4)) == [0, 1, 2, 3, 4]
