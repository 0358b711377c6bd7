"""u-core membership and emptiness, u-balancedness and the u-least-core."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

from .game import Game, as_payoff, rank
from .lp import EQ, GE, Constraint, LinearProgram, LpSolution, Status, solve
from .utility import (TAU_INV, AffineUtility, OutOfRange, RangeClass, UtilityFamily, identity,
                      linearized_constraint, shift)

TAU_BIS = 1e-9
_BRACKET_STEPS = 200


class UnboundedBelow(ValueError):
    pass


class EmptyFamily(ValueError):
    pass


class TooManyVertices(ValueError):
    pass


class CoreVerdict(enum.Enum):
    ALL_PREIMPUTATIONS = "nonempty-all-preimputations"
    EMPTY = "empty"
    DECIDED_BY_LP = "decided-by-lp"


@dataclass(frozen=True)
class CoreStatus:
    verdict: CoreVerdict
    lp_optimum: Fraction | None = None
    core_nonempty: bool = False
    witness: tuple | None = None
    dual_weights: dict | None = None


@dataclass(frozen=True)
class BalanceVerdict:
    balanced: bool
    value: Fraction | None = None
    weights: dict | None = None  # coalition -> weight, grand coalition included


def _chi(n: int, s: int) -> tuple:
    return tuple(Fraction((s >> i) & 1) for i in range(n))


def efficiency_row(game: Game) -> Constraint:
    return Constraint(_chi(game.n, game.grand), EQ, game.value(game.grand))


def exact_inverse(fam: UtilityFamily, s: int, y) -> Fraction:
    """``u_S^{-1}(y)`` as an exact rational; float results are taken at face value."""
    if fam.exact:
        return fam.inverse(s, y)
    val = fam.inverse(s, y)
    if not math.isfinite(val):
        raise OutOfRange(f"inverse of coalition {s} at {y} is not finite")
    return Fraction(val)


def core_membership(game: Game, fam: UtilityFamily, x: Sequence) -> bool:
    x = as_payoff(x, game.n)
    if not game.is_preimputation(x):
        return False
    cls = fam.range_class
    if cls is RangeClass.NEGATIVE:
        return True
    if cls is RangeClass.POSITIVE:
        return not game.nontrivial
    for s in game.nontrivial:
        e = game.excess(s, x)
        if fam.exact:
            if fam.forward(s, e) > 0:
                return False
        else:
            bound = fam.inverse(s, 0.0)
            if float(e) > bound + TAU_INV * max(1.0, abs(bound)):
                return False
    return True


def core_emptiness(game: Game, fam: UtilityFamily) -> CoreStatus:
    """Decide whether the u-core is empty.

    When 0 lies in the utility range this solves
    ``min x(N)  s.t.  x(S) >= v(S) - u_S^{-1}(0) for S in A*,  x(N) >= v(N)``;
    the core is nonempty iff the optimum is ``v(N)``.
    """
    cls = fam.range_class
    n = game.n
    if cls is RangeClass.NEGATIVE or not game.nontrivial:
        share = game.value(game.grand) / n
        return CoreStatus(CoreVerdict.ALL_PREIMPUTATIONS, core_nonempty=True, witness=(share,) * n)
    if cls is RangeClass.POSITIVE:
        return CoreStatus(CoreVerdict.EMPTY, core_nonempty=False)
    rows = [Constraint(_chi(n, s), GE, game.value(s) - exact_inverse(fam, s, 0)) for s in game.nontrivial]
    rows.append(Constraint(_chi(n, game.grand), GE, game.value(game.grand)))
    sol = solve(LinearProgram(_chi(n, game.grand), rows, "min"))
    assert sol.optimal, "the core program is always feasible and bounded"
    weights = {s: w for s, w in zip(game.nontrivial + (game.grand,), sol.dual) if w}
    nonempty = sol.objective_value == game.value(game.grand)
    return CoreStatus(CoreVerdict.DECIDED_BY_LP, sol.objective_value, nonempty,
                      sol.primal if nonempty else None, weights)


def u_balanced(game: Game, fam: UtilityFamily) -> BalanceVerdict:
    """Test u-balancedness through the weight program over balanced systems.

    Maximises ``w_N v(N) + sum_S w_S (v(S) - u_S^{-1}(0))`` subject to
    ``sum_S w_S chi_S + w_N chi_N = chi_N`` and ``w >= 0``. The game is
    u-balanced iff the optimum does not exceed ``v(N)``; otherwise the
    maximising weights are the certificate.
    """
    cls = fam.range_class
    if cls is RangeClass.NEGATIVE:
        return BalanceVerdict(True)
    if cls is RangeClass.POSITIVE:
        return BalanceVerdict(not game.nontrivial)
    n = game.n
    cols = game.nontrivial + (game.grand,)
    gains = [game.value(s) - exact_inverse(fam, s, 0) for s in game.nontrivial] + [game.value(game.grand)]
    rows = [Constraint(tuple(Fraction((s >> i) & 1) for s in cols), EQ, 1) for i in range(n)]
    sol = solve(LinearProgram(tuple(gains), rows, "max", lower=(0,) * len(cols)))
    assert sol.optimal, "the weight program is feasible (w_N = 1) and bounded"
    weights = {s: w for s, w in zip(cols, sol.primal) if w}
    return BalanceVerdict(sol.objective_value <= game.value(game.grand), sol.objective_value, weights)


@dataclass(frozen=True)
class LevelSetPolytope:
    """Preimputations whose u-excess is at most ``level`` on ``coalitions``.

    ``extra_rows`` carries constraints inherited from earlier stages of the
    lexicographic center (fixed coalitions); they are stated over the payoff
    variables directly.
    """

    game: Game
    fam: UtilityFamily
    level: object
    coalitions: tuple
    extra_rows: tuple = ()
    rows: tuple = field(init=False, repr=False)

    def __post_init__(self):
        rows = [efficiency_row(self.game)]
        rows += [level_row(self.game, self.fam, s, self.level) for s in self.coalitions]
        rows += list(self.extra_rows)
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def n(self) -> int:
        return self.game.n

    def contains(self, x: Sequence) -> bool:
        x = as_payoff(x, self.n)
        return all(r.satisfied_by(x) for r in self.rows)

    def optimize(self, direction: Sequence, sense: str = "max") -> LpSolution:
        return solve(LinearProgram(tuple(direction), self.rows, sense))

    def feasible_point(self) -> tuple | None:
        sol = self.optimize((0,) * self.n, "min")
        return sol.primal if sol.optimal else None

    def is_empty(self) -> bool:
        return self.feasible_point() is None

    def vertices(self, limit: int = 200_000) -> list:
        """All vertices, exactly. Raises :class:`TooManyVertices` past ``limit`` candidate bases."""
        return enumerate_vertices(self.rows, self.n, limit)


def level_row(game: Game, fam: UtilityFamily, s: int, level) -> Constraint:
    """``x(S) >= v(S) - u_S^{-1}(level)``."""
    if fam.exact:
        return linearized_constraint(fam, game, s, level)
    return Constraint(_chi(game.n, s), GE, game.value(s) - exact_inverse(fam, s, level))


def core_polytope(game: Game, fam: UtilityFamily) -> LevelSetPolytope:
    return LevelSetPolytope(game, fam, 0 if fam.exact else 0.0, game.nontrivial)


def least_core(game: Game, fam: UtilityFamily, coalitions: Iterable[int] | None = None,
               tol: float = TAU_BIS) -> tuple:
    """Smallest level ``t1`` with nonempty ``X(coalitions, t1)``, and that polytope."""
    coalitions = tuple(game.nontrivial if coalitions is None else coalitions)
    if not coalitions:
        raise EmptyFamily("no nontrivial coalitions: the least core level is undefined")
    if fam.exact:
        t1 = min_level_affine(game, fam, coalitions, (efficiency_row(game),))
    else:
        t1 = min_level_bisect(game, fam, coalitions, (), tol)
    return t1, LevelSetPolytope(game, fam, t1, coalitions)


def min_level_affine(game: Game, fam: UtilityFamily, coalitions: Sequence[int], base_rows: Sequence) -> Fraction:
    """``min t`` over ``base_rows`` and ``u_S(e(S, x)) <= t`` for ``S`` in ``coalitions``."""
    n = game.n
    rows = [Constraint(r.coeffs + (Fraction(0),), r.relation, r.rhs) for r in base_rows]
    rows += [linearized_constraint(fam, game, s) for s in coalitions]
    sol = solve(LinearProgram((Fraction(0),) * n + (Fraction(1),), rows, "min"))
    if sol.status is Status.UNBOUNDED:
        raise UnboundedBelow("the worst u-excess can be made arbitrarily small")
    if sol.status is Status.INFEASIBLE:
        raise ValueError("inherited constraints are infeasible")
    return sol.objective_value


def _feasible_at(game, fam, coalitions, base_rows, t) -> bool:
    try:
        rows = [efficiency_row(game), *base_rows, *(level_row(game, fam, s, t) for s in coalitions)]
    except OutOfRange:
        return False
    sol = solve(LinearProgram((Fraction(0),) * game.n, rows, "min"))
    return sol.optimal


def min_level_bisect(game: Game, fam: UtilityFamily, coalitions: Sequence[int], base_rows: Sequence,
                     tol: float = TAU_BIS, start: float | None = None) -> float:
    """Bisection for the smallest feasible level of a general utility.

    Returns a feasible level within ``tol`` of the infimum.
    """
    lower, upper = fam.range
    if start is None:
        sol = solve(LinearProgram((Fraction(0),) * game.n, (efficiency_row(game), *base_rows), "min"))
        if not sol.optimal:
            raise ValueError("inherited constraints are infeasible")
        start = max(fam.forward(s, game.excess(s, sol.primal)) for s in coalitions)
    hi = float(start)
    if not _feasible_at(game, fam, coalitions, base_rows, hi):
        raise ValueError("starting level is not feasible")
    lo = None
    step = 1.0
    for k in range(1, _BRACKET_STEPS + 1):
        cand = hi - step if math.isinf(lower) else lower + (hi - lower) / 2
        if not (lower < cand < hi):
            break
        if _feasible_at(game, fam, coalitions, base_rows, cand):
            hi = cand
            step *= 2
        else:
            lo = cand
            break
    if lo is None:
        raise UnboundedBelow("the worst u-excess decreases towards the end of the utility range")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        if _feasible_at(game, fam, coalitions, base_rows, mid):
            hi = mid
        else:
            lo = mid
    return hi


def enumerate_vertices(rows: Sequence[Constraint], n: int, limit: int = 200_000) -> list:
    """Vertices of the polyhedron ``rows`` in ``n`` variables, exactly.

    Redundant inequalities are dropped with one LP each, then every basis of
    tight rows is tried.
    """
    eqs = [r for r in rows if r.relation == EQ]
    ineqs = [r for r in rows if r.relation != EQ]
    keep = []
    for i, r in enumerate(ineqs):
        others = eqs + keep + ineqs[i + 1:]
        sense = "min" if r.relation == GE else "max"
        sol = solve(LinearProgram(r.coeffs, others, sense))
        if sol.status is Status.INFEASIBLE:
            return []
        if sol.optimal and r.satisfied_by(sol.primal):
            continue
        keep.append(r)
    rank_eq = rank([list(r.coeffs) for r in eqs])
    need = n - rank_eq
    if need < 0 or need > len(keep):
        return []
    if comb(len(keep), need) > limit:
        raise TooManyVertices(f"{comb(len(keep), need)} candidate bases")
    found = set()
    for pick in combinations(keep, need):
        system = eqs + list(pick)
        x = _solve_square(system, n)
        if x is not None and all(r.satisfied_by(x) for r in rows):
            found.add(x)
    return sorted(found)


def _solve_square(system: Sequence[Constraint], n: int):
    """Unique solution of ``a.x = b`` over the given rows, or ``None``."""
    mat = [list(r.coeffs) + [r.rhs] for r in system]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            return None
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][c]
        mat[r] = [v / p for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, len(mat)):
        if mat[i][n] != 0:
            return None
    return tuple(mat[i][n] for i in range(n))


def least_core_shift(game: Game) -> AffineUtility:
    """Shift utility ``u_S(t) = t - e*`` where ``e*`` is the least-core level of the raw excesses.

    The game is balanced under this utility and its u-prenucleolus is the
    prenucleolus.
    """
    t1, _ = least_core(game, identity())
    return shift(-t1)
