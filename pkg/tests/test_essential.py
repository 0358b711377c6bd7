import random

import pytest
from hypothesis import given, settings, strategies as st

from ucoop.core import core_emptiness, core_polytope
from ucoop.essential import (Dominated, GeneralUtilityUnsupported, NoPartition, NotUBalanced, PartitionLimit,
                             RestrictedFamilyUnsupported, Witness, classical_essential, decompose,
                             dominance_gap, enumerate_partitions, restrict_and_solve, u_essential)
from ucoop.game import Game, mask_of
from ucoop.lexcenter import same_affine_set, solve_prenucleolus
from ucoop.utility import arctan_utility, identity, percapita, u_excess

from oracles import g_star, random_game


def C(*players):
    return mask_of(p - 1 for p in players)


def additive(weights):
    n = len(weights)
    return Game(n, {s: sum(weights[i] for i in range(n) if s >> i & 1) for s in range(1, 1 << n)})


def balanced(game, fam):
    status = core_emptiness(game, fam)
    return game if status.core_nonempty else game.with_values({game.grand: status.lp_optimum})


def test_partitions_of_small_coalitions():
    game = Game(4, {})
    assert enumerate_partitions(game, C(1, 2)) == [(C(1), C(2))]
    assert enumerate_partitions(game, C(1, 2, 3)) == [
        (C(1), C(2), C(3)), (C(1), C(2, 3)), (C(1, 3), C(2)), (C(1, 2), C(3))]
    sparse = Game(3, {C(1, 2): 1, 7: 1}, (C(1, 2),))
    assert enumerate_partitions(sparse, C(1, 2)) == []


def test_partition_size_cap():
    game = Game(16, {})
    with pytest.raises(PartitionLimit):
        enumerate_partitions(game, (1 << 15) - 1)


def test_classical_essential_sets():
    assert set(classical_essential(g_star())) == {C(1), C(2), C(3), C(4), C(1, 2), C(3, 4), C(1, 4), C(1, 2, 3)}
    assert C(1, 2, 4) not in classical_essential(g_star())
    assert classical_essential(additive([2, -1, 5])) == (C(1), C(2), C(3))
    with pytest.raises(RestrictedFamilyUnsupported):
        classical_essential(Game(2, {1: 0, 3: 1}, (1,)))


def test_u_essential_worked_example():
    game = g_star()
    fam = percapita()
    report = u_essential(game, fam, with_classical=True)
    assert set(report.u_essential) == set(game.nontrivial) - {C(1, 2, 4)}
    assert len(report.u_essential) == 13 and not report.core_empty
    assert len(report.classical) == 8
    ev = report.evidence[C(1, 2, 4)]
    assert isinstance(ev, Dominated)
    assert set(ev.partition) <= set(report.u_essential)
    assert dominance_gap(game, fam, C(1, 2, 4), ev.partition, ev.point) <= 0
    assert dominance_gap(game, fam, C(1, 2, 4), (C(1, 2), C(4)), (3, 3, 3, 3)) == -3
    assert u_excess(fam, game, C(1, 2, 4), (3, 3, 3, 3)) == -3
    for s in (C(1), C(2), C(3), C(4)):
        assert isinstance(report.evidence[s], NoPartition)
    assert isinstance(report.evidence[C(1, 2, 3)], Witness) and report.evidence[C(1, 2, 3)].slack > 0


def test_restrict_and_solve_examples():
    game = g_star()
    result = restrict_and_solve(game, percapita())
    assert result.representative == (3, 3, 3, 3) and result.levels == (0, -1)
    classical = classical_essential(game)
    assert solve_prenucleolus(game, percapita(), constraint_set=classical).representative != (3, 3, 3, 3)
    add = additive([2, -1, 5])
    assert restrict_and_solve(add, identity(), [C(1), C(2), C(3)]).representative == (2, -1, 5)


def test_rejections():
    with pytest.raises(GeneralUtilityUnsupported):
        u_essential(g_star(), arctan_utility())
    pairs = Game(3, {C(1, 2): 1, C(1, 3): 1, C(2, 3): 1, 7: 1})
    with pytest.raises(NotUBalanced):
        restrict_and_solve(pairs, identity())
    report = u_essential(pairs, identity())
    assert report.core_empty
    assert set(report.u_essential) == {C(1), C(2), C(3)}


seeds = st.integers(0, 100_000)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_identity_u_essential_is_classical_on_balanced_games(seed, n):
    game = balanced(random_game(random.Random(seed), n), identity())
    assert u_essential(game, identity()).u_essential == classical_essential(game)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(3, 4), st.sampled_from([identity(), percapita()]))
def test_non_essential_coalitions_decompose_at_core_vertices(seed, n, fam):
    game = balanced(random_game(random.Random(seed), n), fam)
    report = u_essential(game, fam)
    ess = set(report.u_essential)
    vertices = core_polytope(game, fam).vertices()
    for s in game.nontrivial:
        if s in ess:
            continue
        for x in vertices:
            part = decompose(game, fam, s, x, ess)
            assert part is not None and set(part) <= ess
            assert dominance_gap(game, fam, s, part, x) <= 0


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4), st.sampled_from([identity(), percapita()]))
def test_restricted_solve_matches_full_solve(seed, n, fam):
    game = balanced(random_game(random.Random(seed), n), fam)
    full = solve_prenucleolus(game, fam)
    restricted = restrict_and_solve(game, fam)
    assert same_affine_set(full, restricted)
    assert full.representative == restricted.representative


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4))
def test_classical_essentials_determine_the_prenucleolus(seed, n):
    game = balanced(random_game(random.Random(seed), n), identity())
    full = solve_prenucleolus(game, identity())
    restricted = solve_prenucleolus(game, identity(), constraint_set=classical_essential(game))
    assert same_affine_set(full, restricted)
