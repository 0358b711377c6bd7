import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ucoop.essential import u_essential
from ucoop.game import Game, mask_of
from ucoop.kohlberg import kohlberg_check
from ucoop.lexcenter import (NotBalanced, check_nonempty, is_singleton, same_affine_set, serialize_trace,
                             solve_prenucleolus)
from ucoop.utility import GeneralUtility, arctan_utility, identity, percapita, shift

from oracles import g_star, random_game


def C(*players):
    return mask_of(p - 1 for p in players)


def coalition_set(*groups):
    return {C(*g) for g in groups}


def test_nonemptiness_examples():
    assert check_nonempty(Game(3, {})).nonempty
    bad = check_nonempty(Game(2, {C(1): 0, C(1, 2): 1}, (C(1),)))
    assert not bad.nonempty and bad.imbalance.uncovered == (1,)
    pairs = check_nonempty(Game(3, {C(1, 2): 0, C(2, 3): 0, C(1, 3): 0, 7: 0}, (C(1, 2), C(2, 3), C(1, 3))))
    assert pairs.nonempty
    assert pairs.certificate.weights == {C(1, 2): F(1, 2), C(1, 3): F(1, 2), C(2, 3): F(1, 2)}


def test_singleton_examples():
    assert is_singleton(Game(4, {}))
    assert not is_singleton(Game(2, {C(1, 2): 1}, ()))
    fam = (C(1), C(2), C(1, 2), C(2, 3))
    assert is_singleton(Game(3, {s: 0 for s in fam} | {7: 0}, fam))


def test_worked_example_trace():
    result = solve_prenucleolus(g_star(), percapita())
    assert result.representative == (3, 3, 3, 3) and result.is_singleton
    assert result.levels == (0, -1)
    assert set(result.trace[0].fixed_coalitions) == coalition_set((3,), (4,), (1, 2), (3, 4), (1, 2, 3), (1, 2, 4))
    assert set(result.trace[1].fixed_coalitions) == coalition_set(
        (1,), (2,), (1, 3), (1, 4), (2, 3), (2, 4), (1, 3, 4), (2, 3, 4))
    assert result.fixed_level(C(1, 2, 4)) == -3
    assert serialize_trace(g_star(), result)[0] == {
        "k": 1, "t_k": "0", "W_k": [["3"], ["4"], ["1", "2"], ["3", "4"], ["1", "2", "3"], ["1", "2", "4"]]}


def test_classical_restriction_moves_the_point():
    game = g_star()
    classical = [C(1), C(2), C(3), C(4), C(1, 2), C(3, 4), C(1, 4), C(1, 2, 3)]
    result = solve_prenucleolus(game.restrict(classical), percapita())
    assert result.representative == (F(13, 3), F(5, 3), 3, 3)
    assert result.levels[:2] == (0, F(-5, 3))


def test_constrained_view_lists_the_essential_coalitions_only():
    game = g_star()
    fam = percapita()
    ess = u_essential(game, fam).u_essential
    result = solve_prenucleolus(game, fam, constraint_set=ess)
    assert result.representative == (3, 3, 3, 3)
    w1 = [s for s in result.trace[0].fixed_coalitions if s in result.constrained]
    assert set(w1) == coalition_set((3,), (4,), (1, 2), (3, 4), (1, 2, 3))
    assert C(1, 2, 4) in result.trace[0].fixed_coalitions


def test_symmetric_pair():
    result = solve_prenucleolus(Game(2, {3: 2}), identity())
    assert result.representative == (1, 1) and result.is_singleton and result.levels == (-1,)


def test_unbalanced_family_raises_with_certificate():
    game = Game(3, {C(1): 1, C(1, 2): 3, 7: 5}, (C(1), C(1, 2)))
    with pytest.raises(NotBalanced) as info:
        solve_prenucleolus(game, identity())
    imb = info.value.imbalance
    assert imb.uncovered == (2,)
    assert sum(imb.direction) == 0


def test_no_constrained_coalitions():
    game = Game(3, {7: 6}, ())
    result = solve_prenucleolus(game, identity())
    assert result.representative == (2, 2, 2) and not result.is_singleton and result.trace == ()
    one = solve_prenucleolus(Game(1, {1: 4}), identity())
    assert one.representative == (4,) and one.is_singleton


def test_non_singleton_solution_is_an_affine_set():
    # two disjoint pairs with equal excess: x(12) = 4 and x(34) = 6, nothing else is pinned down
    fam = (C(1, 2), C(3, 4))
    game = Game(4, {C(1, 2): 2, C(3, 4): 4, 15: 10}, fam)
    result = solve_prenucleolus(game, identity())
    assert not result.is_singleton and result.levels == (-2,)
    assert result.contains((2, 2, 7, -1))
    assert result.contains((0, 4, F(13, 2), F(-1, 2)))
    assert not result.contains((3, 3, 2, 2))


def test_general_mode_matches_affine_on_percapita():
    game = g_star()
    general = GeneralUtility(lambda s, t: t / bin(s).count("1"), lambda s, y: y * bin(s).count("1"),
                             name="percapita")
    result = solve_prenucleolus(game, general)
    assert result.approximate
    assert all(abs(float(a) - 3) < 1e-6 for a in result.representative)
    assert [round(t, 6) for t in result.levels] == [0.0, -1.0]


def test_general_mode_arctan_runs():
    result = solve_prenucleolus(g_star(), arctan_utility())
    assert result.approximate and len(result.levels) >= 2
    assert abs(sum(float(v) for v in result.representative) - 12) < 1e-9
    assert -math.pi / 2 < result.levels[-1] < result.levels[0]


seeds = st.integers(0, 100_000)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4), st.sampled_from([identity(), percapita(), shift(2)]))
def test_trace_is_monotone_and_partitions_the_family(seed, n, fam):
    game = random_game(random.Random(seed), n)
    result = solve_prenucleolus(game, fam)
    levels = result.levels
    assert all(a >= b for a, b in zip(levels, levels[1:]))
    seen = set()
    for rec in result.trace:
        assert rec.newly_fixed
        assert seen.isdisjoint(rec.fixed_coalitions)
        seen.update(rec.fixed_coalitions)
    assert seen == set(game.nontrivial)
    assert game.is_preimputation(result.representative)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4), st.sampled_from([identity(), percapita()]))
def test_output_passes_kohlberg(seed, n, fam):
    game = random_game(random.Random(seed), n)
    result = solve_prenucleolus(game, fam)
    assert kohlberg_check(game, fam, result.representative).verdict


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 4), st.sampled_from([-3, 1, 7]))
def test_shift_keeps_the_solution(seed, n, c):
    game = random_game(random.Random(seed), n)
    a = solve_prenucleolus(game, identity())
    b = solve_prenucleolus(game, shift(c))
    assert a.representative == b.representative and same_affine_set(a, b)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_restricted_families_terminate(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 5)
    fam = set()
    for _ in range(rng.randint(1, 3)):
        labels = [rng.randrange(2) for _ in range(n)]
        blocks = {mask_of(i for i in range(n) if labels[i] == b) for b in (0, 1)} - {0}
        if len(blocks) == 2:
            fam |= blocks
    if not fam:
        fam = {1 << i for i in range(n)}
    game = Game(n, {s: rng.randint(-5, 5) for s in fam} | {(1 << n) - 1: 3}, tuple(fam))
    result = solve_prenucleolus(game, identity())
    assert result.contains(result.representative)
    assert kohlberg_check(game, identity(), result.representative).verdict
