"""Essential and u-essential coalitions, and solving over them alone."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import core_emptiness, u_balanced
from .game import Game, coalition_key, members, payoff_sum, size
from .lexcenter import PrenucleolusResult, solve_prenucleolus
from .lp import GE, Constraint, LinearProgram, solve
from .utility import UtilityFamily, linearized_constraint

MAX_PARTITION_SIZE = 14


class PartitionLimit(ValueError):
    pass


class RestrictedFamilyUnsupported(ValueError):
    pass


class GeneralUtilityUnsupported(ValueError):
    pass


class NotUBalanced(ValueError):
    pass


def enumerate_partitions(game: Game, s: int) -> list:
    """Partitions of ``s`` into at least two nontrivial feasible parts.

    Each partition is a tuple of masks ordered by smallest member; the list
    runs from the finest partitions to the coarsest.
    """
    if size(s) > MAX_PARTITION_SIZE:
        raise PartitionLimit(f"coalition has {size(s)} members; partitions are enumerated up to {MAX_PARTITION_SIZE}")
    grand = game.grand
    out = []

    def parts_of(rest: int, acc: list):
        if not rest:
            if len(acc) >= 2:
                out.append(tuple(acc))
            return
        low = rest & -rest
        others = rest ^ low
        sub = others
        while True:
            part = sub | low
            if part != s and part != grand and part in game:
                acc.append(part)
                parts_of(rest ^ part, acc)
                acc.pop()
            if sub == 0:
                break
            sub = (sub - 1) & others

    parts_of(s, [])
    out.sort(key=lambda p: (-len(p), sorted(coalition_key(t) for t in p)))
    return out


def classical_essential(game: Game) -> tuple:
    """Coalitions that are singletons or worth strictly more than any split.

    Uses the best-split recursion over subsets, ``O(3^n)``.
    """
    if not game.is_full:
        raise RestrictedFamilyUnsupported("essential coalitions are defined for full cooperation only")
    n = game.n
    best = [Fraction(0)] * (1 << n)  # best value over partitions into >= 1 part
    split = [None] * (1 << n)  # best value over partitions into >= 2 parts
    for s in range(1, 1 << n):
        low = s & -s
        others = s ^ low
        top = None
        # parts containing the lowest member, excluding s itself
        if others:
            sub = others
            while True:
                sub = (sub - 1) & others
                part = sub | low
                cand = game.value(part) + best[s ^ part]
                if top is None or cand > top:
                    top = cand
                if sub == 0:
                    break
        split[s] = top
        v = game.value(s)
        best[s] = v if top is None or v > top else top
    result = [s for s in game.nontrivial if size(s) == 1 or game.value(s) > split[s]]
    return tuple(sorted(result, key=coalition_key))


@dataclass(frozen=True)
class NoPartition:
    pass


@dataclass(frozen=True)
class Witness:
    point: tuple
    slack: Fraction


@dataclass(frozen=True)
class Dominated:
    """At ``point`` the partition's summed u-excess is at least the coalition's own."""

    point: tuple
    partition: tuple
    slack: Fraction


@dataclass(frozen=True)
class EmptyCore:
    pass


@dataclass(frozen=True)
class EssentialReport:
    u_essential: tuple
    evidence: dict  # coalition -> NoPartition | Witness | Dominated | EmptyCore
    core_empty: bool
    classical: tuple | None = None


def _u_affine(fam, game, s):
    """``(coeffs, const)`` with ``u_S(e(S, x)) = coeffs . x + const``."""
    a, b = fam.coefficients(s)
    coeffs = [Fraction(0)] * game.n
    for i in members(s):
        coeffs[i] = -a
    return coeffs, a * game.value(s) + b


def _u_at(fam, game, s, x) -> Fraction:
    return fam.forward(s, game.value(s) - payoff_sum(x, s))


def dominance_gap(game: Game, fam: UtilityFamily, s: int, partition: Sequence[int], x: Sequence) -> Fraction:
    """``u_S(e(S, x)) - sum_T u_T(e(T, x))`` over the parts ``T``."""
    return _u_at(fam, game, s, x) - sum((_u_at(fam, game, t, x) for t in partition), Fraction(0))


def _core_rows(game, fam):
    n = game.n
    rows = [Constraint((Fraction(1),) * n + (Fraction(0),), "==", game.value(game.grand))]
    for t in game.nontrivial:
        r = linearized_constraint(fam, game, t, 0)
        rows.append(Constraint(r.coeffs + (Fraction(0),), r.relation, r.rhs))
    return rows


def u_essential(game: Game, fam: UtilityFamily, with_classical: bool = False) -> EssentialReport:
    """Decide u-essentiality of every nontrivial feasible coalition exactly.

    A coalition with a feasible partition is u-essential iff
    ``max delta`` over u-core points ``x`` with
    ``u_S(e(S, x)) - sum_T u_T(e(T, x)) >= delta`` for every partition is
    positive. ``delta`` is capped at 1 so the program stays bounded.
    """
    if not fam.exact:
        raise GeneralUtilityUnsupported("u-essentiality is decided for affine utilities only")
    n = game.n
    core_empty = not core_emptiness(game, fam).core_nonempty
    base = None if core_empty else _core_rows(game, fam)
    essential = []
    evidence = {}
    undecided = []
    for s in game.nontrivial:
        parts = enumerate_partitions(game, s)
        if not parts:
            essential.append(s)
            evidence[s] = NoPartition()
        elif core_empty:
            evidence[s] = EmptyCore()
        else:
            undecided.append((s, parts))
    for s, parts in undecided:
        own, own_c = _u_affine(fam, game, s)
        rows = list(base)
        for part in parts:
            coeffs = list(own)
            const = own_c
            for t in part:
                tc, tk = _u_affine(fam, game, t)
                coeffs = [a - b for a, b in zip(coeffs, tc)]
                const -= tk
            # coeffs.x + const - delta >= 0
            rows.append(Constraint(tuple(coeffs) + (Fraction(-1),), GE, -const))
        rows.append(Constraint((Fraction(0),) * n + (Fraction(1),), "<=", 1))
        sol = solve(LinearProgram((Fraction(0),) * n + (Fraction(1),), rows, "max"))
        assert sol.optimal, "the u-core is nonempty and delta is capped"
        x, delta = sol.primal[:n], sol.objective_value
        if delta > 0:
            essential.append(s)
            evidence[s] = Witness(x, delta)
        else:
            evidence[s] = (x, parts)
    ess = tuple(sorted(essential, key=coalition_key))
    ess_set = set(ess)
    for s, ev in list(evidence.items()):
        if isinstance(ev, tuple):
            x, parts = ev
            dominating = [p for p in parts if dominance_gap(game, fam, s, p, x) <= 0]
            widest = max(dominating, key=len)
            assert ess_set.issuperset(widest), "a widest dominating partition uses essential coalitions only"
            evidence[s] = Dominated(x, widest, -dominance_gap(game, fam, s, widest, x))
    classical = classical_essential(game) if with_classical and game.is_full else None
    return EssentialReport(ess, evidence, core_empty, classical)


def decompose(game: Game, fam: UtilityFamily, s: int, x: Sequence, allowed: Iterable[int]) -> tuple | None:
    """A partition of ``s`` into ``allowed`` coalitions dominating ``s`` at ``x``, if any."""
    allowed = set(allowed)
    for part in enumerate_partitions(game, s):
        if allowed.issuperset(part) and dominance_gap(game, fam, s, part, x) <= 0:
            return part
    return None


def restrict_and_solve(game: Game, fam: UtilityFamily, coalitions: Iterable[int] | None = None) -> PrenucleolusResult:
    """Lexicographic center whose level programs only use ``coalitions``.

    Defaults to the u-essential coalitions; on a u-balanced game the result
    equals the unrestricted solve.
    """
    if not u_balanced(game, fam).balanced:
        raise NotUBalanced("the game is not u-balanced")
    if coalitions is None:
        coalitions = u_essential(game, fam).u_essential
    return solve_prenucleolus(game, fam, constraint_set=coalitions)
