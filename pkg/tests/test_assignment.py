import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ucoop.assignment import (AssignmentSpec, TooManyPlayers, _brute_force, _canonical, _hungarian_value,
                              _matching_value, build_game, max_weight_matching, verify_essential_structure)
from ucoop.core import core_emptiness
from ucoop.game import mask_of
from ucoop.utility import identity

from oracles import brute_matching_value

DIAGONAL = AssignmentSpec(((3, 0), (0, 4)))


def test_single_pair():
    game = build_game(AssignmentSpec(((5,),)))
    assert game.value(game.grand) == 5
    assert game.value(0b01) == 0 and game.value(0b10) == 0


def test_diagonal_instance():
    game = build_game(DIAGONAL)
    assert game.value(game.grand) == 7
    # buyer 1 with seller 2
    assert game.value(mask_of([0, 3])) == 0
    matching, value = max_weight_matching(DIAGONAL)
    assert matching.pairs == ((0, 0), (1, 1)) and value == 7


def test_empty_side_and_ties():
    matching, value = max_weight_matching(DIAGONAL, buyers=[], sellers=None)
    assert matching.pairs == () and value == 0
    matching, value = max_weight_matching(AssignmentSpec(((2, 2),)))
    assert matching.pairs == ((0, 0),) and value == 2


def test_invalid_specs():
    with pytest.raises(ValueError):
        AssignmentSpec(((1, -1),))
    with pytest.raises(ValueError):
        AssignmentSpec(((1, 2), (3,)))
    with pytest.raises(TooManyPlayers):
        build_game(AssignmentSpec(tuple((1,) * 11 for _ in range(11))))


def test_structure_of_diagonal_instance():
    rep = verify_essential_structure(DIAGONAL)
    assert rep.inclusion_holds and not rep.violations
    names = DIAGONAL.names()
    pairs = {tuple(names[i] for i in range(4) if s >> i & 1) for s in rep.essential_mixed_pairs}
    assert pairs == {("b1", "s1"), ("b2", "s2")}
    assert mask_of([0, 1]) not in rep.essential
    assert all(bin(s).count("1") <= 2 for s in rep.essential)
    assert rep.count == 6 and rep.bound == 8


def test_large_instances_use_the_exact_assignment_algorithm():
    rng = random.Random(3)
    for _ in range(5):
        profits = tuple(tuple(F(rng.randint(0, 9)) for _ in range(7)) for _ in range(7))
        spec = AssignmentSpec(profits)
        matching, value = max_weight_matching(spec)
        assert value == _matching_value(profits, list(range(7)), list(range(7)))
        assert sum(profits[b][s] for b, s in matching.pairs) == value


profit_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda k: st.lists(st.lists(st.integers(0, 9), min_size=k, max_size=k), min_size=m, max_size=m)))


@settings(max_examples=150, deadline=None)
@given(profit_matrices)
def test_matching_value_against_enumeration(rows):
    spec = AssignmentSpec(tuple(tuple(r) for r in rows))
    buyers, sellers = range(spec.buyers), range(spec.sellers)
    expected = brute_matching_value(spec.profits, buyers, sellers)
    matching, value = max_weight_matching(spec)
    assert value == expected
    assert sum((spec.profits[b][s] for b, s in matching.pairs), F(0)) == value
    assert len({b for b, _ in matching.pairs}) == len({s for _, s in matching.pairs}) == len(matching.pairs)
    assert _hungarian_value(spec.profits, list(buyers), list(sellers)) == expected
    assert _canonical(spec.profits, list(buyers), list(sellers), value) == matching.pairs
    assert _brute_force(spec.profits, list(buyers), list(sellers))[0] == matching.pairs


@settings(max_examples=25, deadline=None)
@given(profit_matrices)
def test_games_are_balanced_and_structured(rows):
    spec = AssignmentSpec(tuple(tuple(r) for r in rows))
    game = build_game(spec)
    assert core_emptiness(game, identity()).core_nonempty
    for s in range(1, 1 << spec.players):
        bs = [i for i in range(spec.buyers) if s >> i & 1]
        ss = [j for j in range(spec.sellers) if s >> (spec.buyers + j) & 1]
        assert game.value(s) == brute_matching_value(spec.profits, bs, ss)
    rep = verify_essential_structure(spec, game)
    assert rep.inclusion_holds and rep.count <= rep.bound
