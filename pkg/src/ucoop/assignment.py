"""Assignment games: buyers, sellers and a nonnegative profit matrix.

Players ``0..m-1`` are the buyers and ``m..m+m'-1`` the sellers. A coalition
is worth the best total profit of a matching between its buyers and sellers.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .essential import u_essential
from .game import MAX_PLAYERS, Game, coalition_key, size, to_fraction
from .utility import reciprocal_percapita

BRUTE_FORCE_LIMIT = 6
TABULATE_LIMIT = 20


class TooManyPlayers(ValueError):
    pass


@dataclass(frozen=True)
class AssignmentSpec:
    profits: tuple  # m rows (buyers) of m' entries (sellers)

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.profits)
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("profit matrix rows must have equal length")
        if any(v < 0 for row in rows for v in row):
            raise ValueError("profits must be nonnegative")
        object.__setattr__(self, "profits", rows)

    @property
    def buyers(self) -> int:
        return len(self.profits)

    @property
    def sellers(self) -> int:
        return len(self.profits[0]) if self.profits else 0

    @property
    def players(self) -> int:
        return self.buyers + self.sellers

    def names(self) -> tuple:
        return tuple(f"b{i + 1}" for i in range(self.buyers)) + tuple(f"s{j + 1}" for j in range(self.sellers))

    def is_mixed_pair(self, s: int) -> bool:
        buyer_mask = (1 << self.buyers) - 1
        return size(s) == 2 and size(s & buyer_mask) == 1


@dataclass(frozen=True)
class Matching:
    pairs: tuple  # ((buyer, seller), ...) sorted, zero-based indices


def _brute_force(a, buyers, sellers):
    best_val = None
    best_pairs = None

    def walk(i, free, acc, total):
        nonlocal best_val, best_pairs
        if i == len(buyers):
            cand = tuple(acc)
            if best_val is None or total > best_val or (total == best_val and cand < best_pairs):
                best_val, best_pairs = total, cand
            return
        b = buyers[i]
        for s in sellers:
            if s in free:
                free.discard(s)
                acc.append((b, s))
                walk(i + 1, free, acc, total + a[b][s])
                acc.pop()
                free.add(s)
        walk(i + 1, free, acc, total)

    walk(0, set(sellers), [], Fraction(0))
    return best_pairs, best_val


def _hungarian_value(a, buyers, sellers) -> Fraction:
    """Maximum matching weight by the potential-based assignment algorithm."""
    k = max(len(buyers), len(sellers))
    if k == 0:
        return Fraction(0)
    # square cost matrix, 1-based; cost = -profit, padding costs 0
    cost = [[Fraction(0)] * (k + 1) for _ in range(k + 1)]
    for i, b in enumerate(buyers, 1):
        for j, s in enumerate(sellers, 1):
            cost[i][j] = -a[b][s]
    u = [Fraction(0)] * (k + 1)
    v = [Fraction(0)] * (k + 1)
    p = [0] * (k + 1)
    way = [0] * (k + 1)
    for i in range(1, k + 1):
        p[0] = i
        j0 = 0
        minv = [None] * (k + 1)
        used = [False] * (k + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = None
            j1 = 0
            for j in range(1, k + 1):
                if not used[j]:
                    cur = cost[i0][j] - u[i0] - v[j]
                    if minv[j] is None or cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if delta is None or minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(k + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return -sum((cost[p[j]][j] for j in range(1, k + 1)), Fraction(0))


def _canonical(a, buyers, sellers, total):
    """Lexicographically smallest optimal pair list, via a value oracle."""
    pairs = []
    free = list(sellers)
    remaining = total
    start = 0
    while remaining:
        for idx in range(start, len(buyers)):
            b = buyers[idx]
            later = buyers[idx + 1:]
            hit = None
            for s in free:
                rest = [t for t in free if t != s]
                if a[b][s] + _hungarian_value(a, later, rest) == remaining:
                    hit = s
                    break
            if hit is not None:
                pairs.append((b, hit))
                free.remove(hit)
                remaining -= a[b][hit]
                start = idx + 1
                break
        else:
            raise AssertionError("no optimal continuation found")
    return tuple(pairs)


def max_weight_matching(spec: AssignmentSpec, buyers: Iterable[int] | None = None,
                        sellers: Iterable[int] | None = None) -> tuple:
    """Best matching between the given buyers and sellers (zero-based indices).

    Among optimal matchings the lexicographically smallest sorted pair list
    is returned, so zero-profit pairs are left out.
    """
    buyers = sorted(range(spec.buyers) if buyers is None else set(buyers))
    sellers = sorted(range(spec.sellers) if sellers is None else set(sellers))
    a = spec.profits
    if len(buyers) <= BRUTE_FORCE_LIMIT and len(sellers) <= BRUTE_FORCE_LIMIT:
        pairs, value = _brute_force(a, buyers, sellers)
    else:
        value = _hungarian_value(a, buyers, sellers)
        pairs = _canonical(a, buyers, sellers, value)
    return Matching(pairs), value


def _matching_value(a, buyers, sellers) -> Fraction:
    """Value only, by dynamic programming over subsets of sellers."""
    if len(sellers) > len(buyers):
        a = [list(col) for col in zip(*a)]
        buyers, sellers = sellers, buyers
    index = {s: k for k, s in enumerate(sellers)}
    memo = {0: Fraction(0)}
    for b in buyers:
        nxt = dict(memo)
        for used, val in memo.items():
            for s in sellers:
                bit = 1 << index[s]
                if not used & bit and a[b][s]:
                    cand = val + a[b][s]
                    key = used | bit
                    if key not in nxt or cand > nxt[key]:
                        nxt[key] = cand
        memo = nxt
    return max(memo.values())


def build_game(spec: AssignmentSpec) -> Game:
    n = spec.players
    if n > MAX_PLAYERS:
        raise TooManyPlayers(f"{n} players exceed the limit of {MAX_PLAYERS}")
    if n > TABULATE_LIMIT:
        raise TooManyPlayers(f"{n} players are too many to tabulate every coalition (limit {TABULATE_LIMIT})")
    if n == 0:
        raise ValueError("an assignment game needs at least one agent")
    m = spec.buyers
    values = {}
    for s in range(1, 1 << n):
        bs = [i for i in range(m) if s >> i & 1]
        ss = [j for j in range(spec.sellers) if s >> (m + j) & 1]
        if bs and ss:
            val = _matching_value(spec.profits, bs, ss)
            if val:
                values[s] = val
    return Game(n, values, names=spec.names())


@dataclass(frozen=True)
class StructureReport:
    essential: tuple
    inclusion_holds: bool
    violations: tuple
    essential_mixed_pairs: tuple
    count: int
    bound: int


def verify_essential_structure(spec: AssignmentSpec, game: Game | None = None) -> StructureReport:
    """u-essential coalitions under ``u_S(t) = |S| t`` are singletons or buyer-seller pairs."""
    game = build_game(spec) if game is None else game
    report = u_essential(game, reciprocal_percapita())
    ess = report.u_essential
    violations = tuple(s for s in ess if size(s) != 1 and not spec.is_mixed_pair(s))
    mixed = tuple(s for s in ess if spec.is_mixed_pair(s))
    bound = spec.buyers + spec.sellers + spec.buyers * spec.sellers
    return StructureReport(ess, not violations, violations, tuple(sorted(mixed, key=coalition_key)),
                           len(ess), bound)
