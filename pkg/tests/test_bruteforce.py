import random

import pytest
from hypothesis import given, settings

from neighbor_splice.bruteforce import (
    generate_instance,
    generate_instances,
    min_actions_bruteforce,
    min_spans_l2rs_dp,
)
from neighbor_splice.errors import LimitExceeded, Unparseable
from neighbor_splice.oracles import expand_neighbors
from neighbor_splice.parser import parse_min_cost

from .helpers import ids, micro_instances, nset


def test_bruteforce_examples():
    assert min_actions_bruteforce(ids("a b"), nset("a b"), 3) == 1
    assert min_actions_bruteforce(ids("a c b"), nset("a b", "c"), 3) == 2
    assert min_actions_bruteforce(ids("a b"), nset("b a"), 1) is None


def test_bruteforce_finds_replacement():
    # "a c b" from "a z b" + "c": one insert and one overwrite
    assert min_actions_bruteforce(ids("a c b"), nset("a z b", "c"), 3) == 2


def test_bruteforce_limits():
    with pytest.raises(LimitExceeded):
        min_actions_bruteforce(ids("a a a a a a a a a"), nset("a"), 9)
    with pytest.raises(LimitExceeded):
        min_actions_bruteforce(ids("a"), nset("a a a a a a a a a a a a a", "a a a a a a a a a a a a"), 1)
    assert min_actions_bruteforce(ids("a a a a a a a a a"), nset("a"), 9, max_target=9) == 9


def test_parse_cost_caps_the_search():
    assert min_actions_bruteforce(ids("a c b"), nset("a b", "c"), 5, parse_cost=1) is None


def test_dp_examples():
    assert min_spans_l2rs_dp(ids("a b"), nset("a b")) == 1
    assert min_spans_l2rs_dp(ids("a b a b"), nset("a b")) == 2
    assert min_spans_l2rs_dp(ids("a c b"), nset("a b", "c")) == 3
    with pytest.raises(Unparseable):
        min_spans_l2rs_dp(ids("a q"), nset("a b"))


@given(micro_instances(max_len=5, max_nb_len=4))
def test_bruteforce_agrees_with_parser(inst):
    y, neighbors = inst
    cost, _ = parse_min_cost(y, neighbors)
    assert min_actions_bruteforce(y, neighbors, len(y)) == cost
    assert min_actions_bruteforce(y, neighbors, len(y)) <= min_spans_l2rs_dp(y, neighbors)


@settings(max_examples=25)
@given(micro_instances(max_len=4, max_vocab=3, max_neighbors=2, max_nb_len=3))
def test_unpruned_search_agrees(inst):
    y, neighbors = inst
    if sum(map(len, neighbors.sequences)) > 10:
        return
    pruned = min_actions_bruteforce(y, neighbors, len(y))
    assert min_actions_bruteforce(y, neighbors, len(y), pruned=False) == pruned


def test_generator_respects_ranges():
    for inst in generate_instances(300, seed=5):
        assert 1 <= len(inst["y"]) <= 7
        assert 1 <= len(inst["neighbors"]) <= 3
        assert all(1 <= len(nb) <= 6 for nb in inst["neighbors"])
        tokens = set(inst["y"]).union(*map(set, inst["neighbors"]))
        assert len(tokens) <= 5 and min(tokens) >= 3
        ns = expand_neighbors(inst["y"], inst["neighbors"])
        assert sum(map(len, ns.sequences)) <= 24


def test_generator_is_seeded():
    a = [generate_instance(random.Random(9)) for _ in range(3)]
    b = [generate_instance(random.Random(9)) for _ in range(3)]
    assert a == b
