"""Balanced collections with strictly positive weights, and the Kohlberg test."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .game import Game, as_payoff, coalition_key
from .lp import EQ, Constraint, LinearProgram, solve
from .utility import UtilityFamily, u_excess

TAU_LEVEL = 1e-9


class TrivialCoalitionInCollection(ValueError):
    pass


@dataclass(frozen=True)
class BalancedCertificate:
    weights: dict  # coalition -> positive weight


@dataclass(frozen=True)
class Imbalance:
    """Why a collection is not balanced.

    ``direction`` is a side payment summing to zero that no member loses from
    and at least one member gains from; ``uncovered`` lists players in no
    member at all.
    """

    uncovered: tuple
    direction: tuple


def _normalise(n: int, coalitions: Iterable[int]) -> list:
    grand = (1 << n) - 1
    out = sorted(set(coalitions), key=coalition_key)
    for s in out:
        if s == 0 or s == grand or s & ~grand:
            raise TrivialCoalitionInCollection(f"coalition {s} is not a nontrivial subset of the players")
    return out


def is_balanced_collection(n: int, coalitions: Iterable[int]) -> BalancedCertificate | None:
    """Positive weights ``w`` with ``sum_S w_S chi_S = chi_N``, or ``None``.

    Solves ``max e`` subject to ``sum_S (e + m_S) chi_S = chi_N`` with
    ``e, m >= 0``; the collection is balanced iff the optimum is positive.
    """
    cols = _normalise(n, coalitions)
    if not cols:
        return None
    k = len(cols)
    # variables: m_S for each member, then e
    rows = []
    for i in range(n):
        inc = [Fraction((s >> i) & 1) for s in cols]
        rows.append(Constraint(tuple(inc) + (sum(inc, Fraction(0)),), EQ, 1))
    obj = (Fraction(0),) * k + (Fraction(1),)
    sol = solve(LinearProgram(obj, rows, "max", lower=(0,) * (k + 1)))
    if not sol.optimal or sol.objective_value <= 0:
        return None
    eps = sol.objective_value
    return BalancedCertificate({s: eps + m for s, m in zip(cols, sol.primal)})


def imbalance_direction(n: int, coalitions: Iterable[int]) -> Imbalance | None:
    """Certificate that the collection is not balanced, or ``None`` if it is."""
    cols = _normalise(n, coalitions)
    covered = 0
    for s in cols:
        covered |= s
    uncovered = tuple(i for i in range(n) if not covered >> i & 1)
    # maximise sum_S y(S) with y(N) = 0 and 0 <= y(S) <= 1
    rows = [Constraint((Fraction(1),) * n, EQ, 0)]
    for s in cols:
        chi = tuple(Fraction((s >> i) & 1) for i in range(n))
        rows.append((chi, ">=", 0))
        rows.append((chi, "<=", 1))
    obj = [Fraction(0)] * n
    for s in cols:
        for i in range(n):
            if s >> i & 1:
                obj[i] += 1
    sol = solve(LinearProgram(tuple(obj), rows, "max"))
    if sol.objective_value <= 0:
        return None
    return Imbalance(uncovered, sol.primal)


@dataclass(frozen=True)
class LevelReport:
    alpha: object
    coalitions: tuple
    certificate: BalancedCertificate | None

    @property
    def balanced(self) -> bool:
        return self.certificate is not None


@dataclass(frozen=True)
class KohlbergReport:
    verdict: bool
    levels: tuple
    first_failure: LevelReport | None
    approximate: bool = False


def level_sets(game: Game, fam: UtilityFamily, x: Sequence) -> list:
    """``[(alpha, D(alpha))]`` for each attained u-excess level, highest first.

    ``D(alpha)`` holds every nontrivial feasible coalition whose u-excess is at
    least ``alpha``. Float levels closer than the merge tolerance are grouped.
    """
    values = sorted(((u_excess(fam, game, s, x), s) for s in game.nontrivial),
                    key=lambda p: p[0], reverse=True)
    out = []
    members: list = []
    i = 0
    while i < len(values):
        alpha = values[i][0]
        j = i
        while j < len(values) and (values[j][0] == alpha or
                                   (not fam.exact and abs(values[j][0] - alpha) <= TAU_LEVEL)):
            members.append(values[j][1])
            j += 1
        level = values[j - 1][0]
        out.append((level, tuple(sorted(members, key=coalition_key))))
        i = j
    return out


def kohlberg_check(game: Game, fam: UtilityFamily, x: Sequence, exhaustive: bool = False) -> KohlbergReport:
    """Test whether ``x`` lies in the u-prenucleolus by the level-set criterion.

    Every nonempty ``D(alpha)`` must be balanced. Stops at the first failing
    level unless ``exhaustive`` is set.
    """
    x = as_payoff(x, game.n)
    if not game.is_preimputation(x):
        raise ValueError("payoff is not a preimputation")
    reports = []
    failure = None
    for alpha, coalitions in level_sets(game, fam, x):
        rep = LevelReport(alpha, coalitions, is_balanced_collection(game.n, coalitions))
        reports.append(rep)
        if not rep.balanced and failure is None:
            failure = rep
            if not exhaustive:
                break
    return KohlbergReport(failure is None, tuple(reports), failure, not fam.exact)
