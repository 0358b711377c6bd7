"""The lexicographic center algorithm for the u-prenucleolus.

Stage ``k`` minimises the worst u-excess ``t_k`` over the coalitions not yet
fixed, inside the polytope left by the earlier stages. Every coalition whose
payoff ``x(S)`` is then constant over the optimal set is fixed at that value.
The run stops once no constrained coalition is left unfixed; the remaining
polytope is the u-prenucleolus.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import TAU_BIS, UnboundedBelow, _chi, efficiency_row, exact_inverse, level_row, min_level_bisect
from .game import Game, coalition_key, incidence_rank, members, payoff_sum, rank
from .kohlberg import BalancedCertificate, Imbalance, imbalance_direction, is_balanced_collection
from .lp import EQ, GE, Constraint, LinearProgram, Status, solve
from .utility import UtilityFamily, linearized_constraint

TAU_FIX = 1e-8


class NotBalanced(ValueError):
    """The nontrivial feasible coalitions do not form a balanced collection."""

    def __init__(self, message: str, imbalance: Imbalance | None = None):
        super().__init__(message)
        self.imbalance = imbalance


class BisectionTolerance(RuntimeError):
    pass


@dataclass(frozen=True)
class NonemptyCheck:
    nonempty: bool
    certificate: BalancedCertificate | None = None
    imbalance: Imbalance | None = None

    def __bool__(self) -> bool:
        return self.nonempty


def check_nonempty(game: Game) -> NonemptyCheck:
    """Is the u-prenucleolus nonempty? Equivalent to ``A*`` being balanced.

    With no nontrivial coalitions every preimputation qualifies.
    """
    if not game.nontrivial:
        return NonemptyCheck(True)
    cert = is_balanced_collection(game.n, game.nontrivial)
    if cert is not None:
        return NonemptyCheck(True, cert)
    return NonemptyCheck(False, imbalance=imbalance_direction(game.n, game.nontrivial))


@dataclass(frozen=True)
class IterationRecord:
    k: int
    t: object
    newly_fixed: tuple  # ((coalition, level), ...) in canonical order
    rows: tuple  # rows describing X_k

    @property
    def fixed_coalitions(self) -> tuple:
        return tuple(s for s, _ in self.newly_fixed)


@dataclass(frozen=True)
class PrenucleolusResult:
    trace: tuple
    representative: tuple
    is_singleton: bool
    solution_description: tuple  # rows cutting out the final polytope
    approximate: bool = False
    constrained: frozenset = field(default_factory=frozenset)

    @property
    def levels(self) -> tuple:
        return tuple(rec.t for rec in self.trace)

    def fixed_level(self, s: int):
        for rec in self.trace:
            for c, level in rec.newly_fixed:
                if c == s:
                    return level
        raise KeyError(s)

    def contains(self, x: Sequence) -> bool:
        return all(r.satisfied_by(x) for r in self.solution_description)


def is_singleton(game: Game, result: PrenucleolusResult | None = None) -> bool:
    """Rank test: the u-prenucleolus is a point iff the feasible family has full rank."""
    return incidence_rank(game.n, game.family) == game.n


class _Span:
    """Incrementally row-reduced basis used to test membership in a row span."""

    def __init__(self, n: int):
        self.n = n
        self.pivots: list = []  # (column, normalised row)

    def reduce(self, vec: Sequence[Fraction]) -> list:
        vec = list(vec)
        for c, row in self.pivots:
            f = vec[c]
            if f:
                vec = [a - f * b for a, b in zip(vec, row)]
        return vec

    def add(self, vec: Sequence[Fraction]) -> bool:
        vec = self.reduce(vec)
        c = next((i for i, a in enumerate(vec) if a), None)
        if c is None:
            return False
        p = vec[c]
        vec = [a / p for a in vec]
        self.pivots = [(pc, [a - row[c] * b for a, b in zip(row, vec)]) if row[c] else (pc, row)
                       for pc, row in self.pivots]
        self.pivots.append((c, vec))
        return True

    def contains(self, vec: Sequence[Fraction]) -> bool:
        return not any(self.reduce(vec))


def solve_prenucleolus(game: Game, fam: UtilityFamily, constraint_set: Iterable[int] | None = None,
                       tol_bis: float = TAU_BIS, tol_fix: float = TAU_FIX) -> PrenucleolusResult:
    """Run the lexicographic center on ``game``.

    ``constraint_set`` limits which coalitions enter the level programs
    (default: all nontrivial feasible coalitions). Fixing is still tracked
    for every nontrivial feasible coalition.
    """
    check = check_nonempty(game)
    if not check:
        raise NotBalanced("the nontrivial feasible coalitions are not balanced", check.imbalance)
    n = game.n
    everyone = game.nontrivial
    if constraint_set is None:
        constrained = frozenset(everyone)
    else:
        constrained = frozenset(constraint_set)
        stray = constrained - set(everyone)
        if stray:
            raise ValueError(f"constraint coalitions outside the feasible family: {sorted(stray)}")
    eff = efficiency_row(game)
    if not constrained:
        share = game.value(game.grand) / n
        return PrenucleolusResult((), (share,) * n, n == 1, (eff,), not fam.exact, constrained)

    exact = fam.exact
    span = _Span(n)
    span.add(eff.coeffs)
    base = []  # rows from fixed coalitions
    unfixed = list(everyone)
    trace = []
    point = None
    t_prev = None
    for k in range(1, len(everyone) + 2):
        active = [s for s in unfixed if s in constrained]
        if not active:
            break
        if exact:
            t_k, point, tight = _stage_affine(game, fam, active, [eff, *base])
            level_rows = [linearized_constraint(fam, game, s, t_k) for s in active]
        else:
            t_k = min_level_bisect(game, fam, active, base, tol_bis, start=t_prev)
            level_rows = [level_row(game, fam, s, t_k) for s in active]
            tight = set()
            point = None
        rows = (eff, *base, *level_rows)
        samples = [point] if point is not None else []
        newly = []
        for s in unfixed:
            value = _fixed_value(rows, span, s, n, tight, samples, exact, tol_fix)
            if value is None:
                continue
            level = fam.forward(s, game.value(s) - value)
            newly.append((s, level))
        if not newly:
            if exact:
                raise RuntimeError("stage fixed no coalition; the level program is inconsistent")
            raise BisectionTolerance(f"stage {k} could not separate a fixed coalition at tolerance {tol_fix}")
        newly.sort(key=lambda p: coalition_key(p[0]))
        for s, level in newly:
            unfixed.remove(s)
            chi = _chi(n, s)
            if exact:
                base.append(Constraint(chi, EQ, game.value(s) - fam.inverse(s, level)))
                span.add(chi)
            elif s in constrained:
                base.append(Constraint(chi, GE, game.value(s) - exact_inverse(fam, s, t_k)))
        trace.append(IterationRecord(k, t_k, tuple(newly), rows))
        if point is None:
            point = samples[0] if samples else None
        t_prev = t_k
    else:
        raise RuntimeError("iteration cap exceeded")

    final = (eff, *base)
    if point is None or not all(r.satisfied_by(point) for r in final):
        sol = solve(LinearProgram((Fraction(0),) * n, final, "min"))
        point = sol.primal
    return PrenucleolusResult(tuple(trace), tuple(point), is_singleton(game), final, not exact, constrained)


def _stage_affine(game, fam, active, base):
    """Minimise the worst u-excess over ``active``; returns level, point, tight set."""
    n = game.n
    rows = [Constraint(r.coeffs + (Fraction(0),), r.relation, r.rhs) for r in base]
    rows += [linearized_constraint(fam, game, s) for s in active]
    sol = solve(LinearProgram((Fraction(0),) * n + (Fraction(1),), rows, "min"))
    if sol.status is Status.UNBOUNDED:
        raise UnboundedBelow("the worst u-excess can be made arbitrarily small")
    if sol.status is Status.INFEASIBLE:
        raise RuntimeError("inherited constraints became infeasible")
    offset = len(base)
    tight = {s for s, y in zip(active, sol.dual[offset:]) if y > 0}
    return sol.objective_value, sol.primal[:n], tight


def _fixed_value(rows, span, s, n, tight, samples, exact, tol_fix):
    """Common value of ``x(S)`` over the polytope ``rows``, or ``None`` if it varies."""
    chi = _chi(n, s)
    if exact and (s in tight or span.contains(chi)):
        return payoff_sum(samples[0], s) if samples else _probe(rows, chi, "max").objective_value
    if exact and len({payoff_sum(p, s) for p in samples}) > 1:
        return None
    hi = _probe(rows, chi, "max")
    lo = _probe(rows, chi, "min")
    samples.extend(p for p in (hi.primal, lo.primal) if p not in samples)
    if exact:
        return hi.objective_value if hi.objective_value == lo.objective_value else None
    if float(hi.objective_value - lo.objective_value) <= tol_fix:
        return (hi.objective_value + lo.objective_value) / 2
    return None


def _probe(rows, direction, sense):
    sol = solve(LinearProgram(direction, rows, sense))
    if not sol.optimal:
        raise RuntimeError(f"probe of the stage polytope returned {sol.status.value}")
    return sol


def serialize_trace(game: Game, result: PrenucleolusResult) -> list:
    """``[{"k", "t_k", "W_k"}]`` with rationals as strings and coalitions as sorted name lists."""
    out = []
    for rec in result.trace:
        out.append({
            "k": rec.k,
            "t_k": str(rec.t),
            "W_k": [[game.names[i] for i in members(s)] for s in rec.fixed_coalitions],
        })
    return out



def same_affine_set(a: PrenucleolusResult, b: PrenucleolusResult) -> bool:
    """Do two exact results describe the same affine set?

    Both equality systems must have the same row space and each
    representative must satisfy the other system.
    """
    rows_a = [list(r.coeffs) for r in a.solution_description]
    rows_b = [list(r.coeffs) for r in b.solution_description]
    ra, rb = rank(rows_a), rank(rows_b)
    if ra != rb or rank(rows_a + rows_b) != ra:
        return False
    return a.contains(b.representative) and b.contains(a.representative)
