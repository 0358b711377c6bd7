import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ucoop.game import Game, mask_of
from ucoop.kohlberg import (TrivialCoalitionInCollection, imbalance_direction, is_balanced_collection,
                            kohlberg_check, level_sets)
from ucoop.utility import arctan_utility, identity, percapita, u_excess

from oracles import g_star, random_game


def C(*players):
    return mask_of(p - 1 for p in players)


def test_partition_is_balanced():
    cert = is_balanced_collection(3, [C(1), C(2), C(3)])
    assert cert.weights == {C(1): 1, C(2): 1, C(3): 1}


def test_pairs_are_balanced_with_halves():
    cert = is_balanced_collection(3, [C(1, 2), C(2, 3), C(1, 3)])
    assert cert.weights == {C(1, 2): F(1, 2), C(2, 3): F(1, 2), C(1, 3): F(1, 2)}


def test_uncovered_player_is_not_balanced():
    assert is_balanced_collection(3, [C(1), C(1, 2)]) is None
    imb = imbalance_direction(3, [C(1), C(1, 2)])
    assert imb.uncovered == (2,)
    assert sum(imb.direction) == 0


def test_weakly_balanced_is_not_enough():
    # player 3 forces weight 1 on {2,3}, which leaves weight 0 for {1,2}
    family = [C(1), C(1, 2), C(2, 3)]
    assert is_balanced_collection(3, family) is None
    imb = imbalance_direction(3, family)
    assert imb is not None and imb.uncovered == ()
    gains = [sum((imb.direction[i] for i in range(3) if s >> i & 1), F(0)) for s in family]
    assert all(g >= 0 for g in gains) and any(g > 0 for g in gains)


def test_trivial_members_rejected():
    with pytest.raises(TrivialCoalitionInCollection):
        is_balanced_collection(2, [0b11])
    with pytest.raises(TrivialCoalitionInCollection):
        is_balanced_collection(2, [0])


def test_worked_example_verdicts():
    game = g_star()
    fam = percapita()
    assert kohlberg_check(game, fam, (3, 3, 3, 3)).verdict
    rep = kohlberg_check(game, fam, (F(13, 3), F(5, 3), 3, 3))
    assert not rep.verdict and rep.first_failure is not None


def test_symmetric_pair_rejects_unequal_split():
    game = Game(2, {3: 2})
    rep = kohlberg_check(game, identity(), (2, 0))
    assert not rep.verdict
    assert rep.first_failure.coalitions == (C(2),)
    assert kohlberg_check(game, identity(), (1, 1)).verdict


def test_not_a_preimputation():
    with pytest.raises(ValueError):
        kohlberg_check(g_star(), percapita(), (0, 0, 0, 0))


def test_general_mode_is_flagged():
    rep = kohlberg_check(Game(2, {3: 2}), arctan_utility(), (1, 1))
    assert rep.verdict and rep.approximate


payoffs = st.lists(st.builds(F, st.integers(-30, 30), st.integers(1, 4)), min_size=3, max_size=3)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000), payoffs)
def test_level_sets_grow_downwards_and_end_at_everything(seed, head):
    game = random_game(random.Random(seed), 4)
    x = tuple(head) + (game.value(game.grand) - sum(head, F(0)),)
    levels = level_sets(game, percapita(), x)
    for (a, upper), (b, lower) in zip(levels, levels[1:]):
        assert a > b and set(upper) < set(lower)
    for alpha, members in levels:
        assert set(members) == {s for s in game.nontrivial if u_excess(percapita(), game, s, x) >= alpha}
    assert set(levels[-1][1]) == set(game.nontrivial)
