"""TU-games with restricted cooperation.

Coalitions are plain ``int`` bitmasks: bit ``i`` is set when player ``i`` is a
member. Characteristic values and payoffs are :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

MAX_PLAYERS = 62

Payoff = tuple  # tuple[Fraction, ...]


class GameError(ValueError):
    pass


class UnknownCoalition(GameError):
    pass


def to_fraction(value) -> Fraction:
    """Parse an exact rational from an int, a Fraction or a ``"p/q"`` string."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise TypeError(f"cannot read {value!r} as an exact rational")


def mask_of(players: Iterable[int]) -> int:
    mask = 0
    for p in players:
        if p < 0 or p >= MAX_PLAYERS:
            raise GameError(f"player index {p} out of range")
        mask |= 1 << p
    return mask


def members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def size(mask: int) -> int:
    return bin(mask).count("1")


def coalition_key(mask: int):
    """Canonical display order: by size, then by sorted member list."""
    return (size(mask), members(mask))


def payoff_sum(x: Sequence[Fraction], mask: int) -> Fraction:
    total = Fraction(0)
    for i in members(mask):
        total += x[i]
    return total


@dataclass(frozen=True)
class Game:
    """A TU-game ``v`` on players ``0..n-1`` with feasible family ``A``.

    With ``family=None`` the game has full cooperation (``A = P(N)``) and
    coalitions missing from ``values`` are worth 0. Otherwise ``family`` lists
    ``A`` explicitly (the empty and grand coalitions are added) and every
    nonempty member must have a value.
    """

    n: int
    values: Mapping[int, Fraction]
    family_masks: tuple | None = None
    names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, int) or n < 1 or n > MAX_PLAYERS:
            raise GameError(f"player count must be in 1..{MAX_PLAYERS}, got {n!r}")
        grand = (1 << n) - 1
        vals = {}
        for s, v in dict(self.values).items():
            if not isinstance(s, int) or s < 0 or s & ~grand:
                raise GameError(f"coalition {s!r} is not a subset of the grand coalition")
            vals[s] = to_fraction(v)
        if vals.get(0, 0) != 0:
            raise GameError("v(empty) must be 0")
        vals[0] = Fraction(0)

        if self.family_masks is None:
            if not self.names:
                object.__setattr__(self, "names", tuple(str(i + 1) for i in range(n)))
            vals = {s: v for s, v in vals.items() if v != 0 or s in (0, grand)}
            vals.setdefault(grand, Fraction(0))
        else:
            fam = set(self.family_masks) | {0, grand}
            for s in fam:
                if not isinstance(s, int) or s < 0 or s & ~grand:
                    raise GameError(f"coalition {s!r} is not a subset of the grand coalition")
            extra = set(vals) - fam
            if extra:
                raise GameError(f"values given for infeasible coalitions {sorted(extra)}")
            missing = [s for s in fam if s not in vals]
            if missing:
                raise GameError(f"restricted family requires explicit values; missing {sorted(missing)}")
            object.__setattr__(self, "family_masks", tuple(sorted(fam)))
            if not self.names:
                object.__setattr__(self, "names", tuple(str(i + 1) for i in range(n)))
        if len(self.names) != n:
            raise GameError("need one name per player")
        object.__setattr__(self, "values", MappingProxyType(vals))

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    @property
    def restricted(self) -> bool:
        return self.family_masks is not None

    @cached_property
    def family(self) -> tuple:
        if self.family_masks is None:
            return tuple(range(1 << self.n))
        return self.family_masks

    @cached_property
    def nontrivial(self) -> tuple:
        """A* = A minus the empty and grand coalitions, in canonical order."""
        grand = self.grand
        return tuple(sorted((s for s in self.family if s not in (0, grand)), key=coalition_key))

    @cached_property
    def _family_set(self) -> frozenset:
        return frozenset(self.family)

    @property
    def is_full(self) -> bool:
        return len(self.family) == 1 << self.n

    def __contains__(self, s: int) -> bool:
        if self.family_masks is None:
            return isinstance(s, int) and 0 <= s <= self.grand
        return s in self._family_set

    def value(self, s: int) -> Fraction:
        if s not in self:
            raise UnknownCoalition(f"coalition {self.label(s)} is not feasible")
        return self.values.get(s, Fraction(0))

    def excess(self, s: int, x: Sequence[Fraction]) -> Fraction:
        return self.value(s) - payoff_sum(x, s)

    def is_preimputation(self, x: Sequence[Fraction]) -> bool:
        x = as_payoff(x, self.n)
        return sum(x, Fraction(0)) == self.value(self.grand)

    def label(self, s: int) -> str:
        return "{" + ",".join(self.names[i] for i in members(s)) + "}"

    def restrict(self, coalitions: Iterable[int]) -> "Game":
        """The game with feasible family ``coalitions`` plus the trivial ones."""
        fam = set(coalitions) | {0, self.grand}
        return Game(self.n, {s: self.value(s) for s in fam}, tuple(sorted(fam)), self.names)

    def with_values(self, changes: Mapping[int, Fraction]) -> "Game":
        vals = {s: self.value(s) for s in self.family} if self.restricted else dict(self.values)
        vals.update(changes)
        return Game(self.n, vals, self.family_masks, self.names)


def as_payoff(x: Sequence, n: int) -> tuple:
    if len(x) != n:
        raise GameError(f"payoff has {len(x)} entries, expected {n}")
    return tuple(to_fraction(v) for v in x)


def coalition_value(game: Game, s: int) -> Fraction:
    return game.value(s)


def excess(game: Game, s: int, x: Sequence[Fraction]) -> Fraction:
    """``e(S, x) = v(S) - x(S)``."""
    return game.excess(s, as_payoff(x, game.n))


def is_preimputation(game: Game, x: Sequence[Fraction]) -> bool:
    return game.is_preimputation(x)


def incidence_rank(n: int, coalitions: Iterable[int]) -> int:
    """Rank over Q of the 0/1 matrix whose rows are the given coalitions."""
    return rank([[Fraction((s >> i) & 1) for i in range(n)] for s in coalitions])


def rank(rows: list) -> int:
    """Exact rank of a rational matrix by Gaussian elimination."""
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        p = mat[r][c]
        for i in range(r + 1, len(mat)):
            f = mat[i][c]
            if f:
                f = f / p
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    return r
