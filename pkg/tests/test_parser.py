import pytest
from hypothesis import given
from hypothesis import strategies as st

from neighbor_splice.core import ExpandedNeighborSet
from neighbor_splice.errors import EmptyTarget, Unparseable
from neighbor_splice.matching import MatchTable, find_occurrences
from neighbor_splice.oracles import expand_neighbors
from neighbor_splice.parser import Chart, parse_min_cost, recompute_cost

from .helpers import ids, micro_instances, nset


# ---------------------------------------------------------------- match table

def test_lce_identical():
    t = MatchTable(ids("a b"), nset("a b"))
    assert t.lce_at(1, 1, 1) == 2


def test_lce_reversed():
    t = MatchTable(ids("a b"), nset("b a"))
    assert t.lce_at(1, 1, 1) == 0
    assert t.lce_at(1, 2, 1) == 1


def test_lce_bounded_by_neighbor_remainder():
    t = MatchTable(ids("a a a"), nset("a a"))
    assert t.lce_at(1, 1, 1) == 2
    assert t.lce_at(1, 2, 1) == 1


def test_lce_stops_at_neighbor_boundary():
    # the flat concatenation must not let a match run into the next neighbor
    t = MatchTable(ids("a b"), nset("a", "b"))
    assert t.lce_at(1, 1, 1) == 1


def test_mask_never_matches():
    neighbors = ExpandedNeighborSet.of((2, 3))
    t = MatchTable((2, 3), neighbors)
    assert t.lce_at(1, 1, 1) == 0
    assert t.lce_at(1, 2, 2) == 1


@given(micro_instances())
def test_lce_invariant(inst):
    y, neighbors = inst
    t = MatchTable(y, neighbors)
    for n, seq in enumerate(neighbors.sequences, start=1):
        for k in range(1, len(seq) + 1):
            for a in range(1, len(y) + 1):
                m = t.lce_at(n, k, a)
                assert seq[k - 1:k - 1 + m] == y[a - 1:a - 1 + m]
                if k - 1 + m < len(seq) and a - 1 + m < len(y):
                    assert seq[k - 1 + m] != y[a - 1 + m]


def test_matches_lists_all_positions():
    t = MatchTable(ids("a b"), nset("a b a", "b a b"))
    assert sorted(t.matches(1, 2)) == [(1, 1), (2, 2)]
    assert find_occurrences(nset("a b a", "b a b"), ids("a b")) == ((1, 1, 2), (2, 2, 3))


# ---------------------------------------------------------------- parse examples

def test_parse_whole_span():
    cost, tree = parse_min_cost(ids("a b"), nset("a b"))
    assert cost == 1
    assert tree.rule == "S->Y"
    leaf = tree.children[0]
    assert (leaf.n, leaf.k, leaf.l) == (1, 1, 2)


def test_parse_gap_fill():
    cost, tree = parse_min_cost(ids("a c b"), nset("a b", "c"))
    assert cost == 2
    assert tree.rule == "S->Y C"
    y1, c = tree.children
    assert (y1.n, y1.k, y1.l) == (1, 1, 1)
    assert (c.rule, c.n, c.s) == ("C->S R", 1, 2)
    s, r = c.children
    assert s.rule == "S->Y" and (s.children[0].n, s.children[0].k, s.children[0].l) == (2, 1, 1)
    assert (r.rule, r.n, r.s) == ("R->Y", 1, 2)
    assert (r.children[0].n, r.children[0].k, r.children[0].l) == (1, 2, 2)


def test_parse_concatenation():
    cost, tree = parse_min_cost(ids("a b a b"), nset("a b"))
    assert cost == 2
    assert tree.rule == "S->S S"


def test_parse_three_actions():
    cost, _ = parse_min_cost(ids("x a y b"), nset("a b", "x", "y"))
    assert cost == 3


def test_parse_errors():
    with pytest.raises(EmptyTarget):
        parse_min_cost((), nset("a"))
    with pytest.raises(Unparseable):
        parse_min_cost(ids("a q"), nset("a b"))


def test_prefers_single_span_on_ties():
    # "a b" can come from one span; S->Y must win over any equal-cost alternative
    _, tree = parse_min_cost(ids("a b"), nset("a x b", "a b"))
    assert tree.rule == "S->Y"
    assert tree.children[0].n == 2


def test_tie_break_smaller_neighbor_first():
    _, tree = parse_min_cost(ids("a b"), nset("c a b", "a b"))
    leaf = tree.children[0]
    assert (leaf.n, leaf.k) == (1, 2)


def test_chart_is_deterministic():
    y = ids("a b c a b d")
    neighbors = nset("a b c", "c a", "b d", "a b")
    first = Chart(y, neighbors).tree().pretty()
    assert all(Chart(y, neighbors).tree().pretty() == first for _ in range(3))


def test_stats_dict():
    chart = Chart(ids("a c b"), nset("a b", "c"))
    stats = chart.stats().as_dict()
    assert stats["target_length"] == 3
    assert stats["neighbors"] == 2
    assert stats["s_items"] >= 1


# ---------------------------------------------------------------- properties

@given(micro_instances())
def test_tree_is_consistent(inst):
    y, neighbors = inst
    cost, tree = parse_min_cost(y, neighbors)
    assert recompute_cost(tree) == cost == tree.cost()
    assert tree.yield_tokens(neighbors) == y
    assert 1 <= cost <= len(y)


@given(micro_instances(), st.lists(st.integers(3, 6), min_size=1, max_size=5))
def test_adding_a_neighbor_never_raises_cost(inst, extra):
    y, neighbors = inst
    before, _ = parse_min_cost(y, neighbors)
    more = ExpandedNeighborSet(neighbors.sequences + (tuple(extra),))
    after, _ = parse_min_cost(y, more)
    assert after <= before


@given(micro_instances())
def test_self_neighbor_costs_one(inst):
    y, neighbors = inst
    more = ExpandedNeighborSet(neighbors.sequences + (y,))
    assert parse_min_cost(y, more)[0] == 1


def test_long_target_parses():
    y = tuple(3 + (i * 7) % 11 for i in range(40))
    neighbors = expand_neighbors(y, [y[:15], y[10:30], y[25:]])
    cost, tree = parse_min_cost(y, neighbors)
    assert cost <= 3
    assert tree.yield_tokens(neighbors) == y
