"""Per-coalition utility transforms applied to excesses.

Two kinds are supported. :class:`AffineUtility` maps an excess ``t`` of
coalition ``S`` to ``a_S * t + b_S`` with ``a_S > 0`` and is evaluated exactly.
:class:`GeneralUtility` wraps user supplied forward and inverse evaluators
together with the common open range of the transforms; it is evaluated in
floating point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

from .game import Game, size, to_fraction
from .lp import GE, Constraint

TAU_INV = 1e-12


class UtilityError(ValueError):
    pass


class TrivialCoalition(UtilityError):
    pass


class OutOfRange(UtilityError):
    pass


class RangeClass(enum.Enum):
    CONTAINS_ZERO = "contains-zero"
    NEGATIVE = "negative"
    POSITIVE = "positive"


@dataclass(frozen=True)
class AffineUtility:
    """``u_S(t) = a_S * t + b_S``.

    ``kind`` selects how the coefficients depend on the coalition:
    ``identity``, ``percapita`` (``1/|S|``), ``reciprocal-percapita`` (``|S|``),
    ``shift`` (``t + c``), ``q-weighted`` (``t / q(S)``) or ``table`` (explicit
    ``(a_S, b_S)`` per coalition).
    """

    kind: str
    c: Fraction = Fraction(0)
    weights: Mapping[int, Fraction] = field(default_factory=dict)
    table: Mapping[int, tuple] = field(default_factory=dict)

    exact = True

    def __post_init__(self):
        if self.kind not in _AFFINE_KINDS:
            raise UtilityError(f"unknown affine utility kind {self.kind!r}")
        object.__setattr__(self, "c", to_fraction(self.c))
        weights = {s: to_fraction(q) for s, q in dict(self.weights).items()}
        for s, q in weights.items():
            if q <= 0:
                raise UtilityError(f"weight of coalition {s} must be positive, got {q}")
        object.__setattr__(self, "weights", MappingProxyType(weights))
        table = {}
        for s, (a, b) in dict(self.table).items():
            a, b = to_fraction(a), to_fraction(b)
            if a <= 0:
                raise UtilityError(f"scale of coalition {s} must be positive, got {a}")
            table[s] = (a, b)
        object.__setattr__(self, "table", MappingProxyType(table))

    @property
    def range(self) -> tuple:
        return (-math.inf, math.inf)

    @property
    def range_class(self) -> RangeClass:
        return RangeClass.CONTAINS_ZERO

    def coefficients(self, s: int) -> tuple[Fraction, Fraction]:
        kind = self.kind
        if kind == "identity":
            return Fraction(1), Fraction(0)
        if kind == "percapita":
            return Fraction(1, size(s)), Fraction(0)
        if kind == "reciprocal-percapita":
            return Fraction(size(s)), Fraction(0)
        if kind == "shift":
            return Fraction(1), self.c
        if kind == "q-weighted":
            if s not in self.weights:
                raise UtilityError(f"no weight for coalition {s}")
            return 1 / self.weights[s], Fraction(0)
        if s not in self.table:
            raise UtilityError(f"no coefficients for coalition {s}")
        return self.table[s]

    def forward(self, s: int, t) -> Fraction:
        a, b = self.coefficients(s)
        return a * to_fraction(t) + b

    def inverse(self, s: int, y) -> Fraction:
        a, b = self.coefficients(s)
        return (to_fraction(y) - b) / a

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "shift":
            out["c"] = str(self.c)
        elif self.kind == "q-weighted":
            out["weights"] = {str(s): str(q) for s, q in sorted(self.weights.items())}
        elif self.kind == "table":
            out["table"] = {str(s): [str(a), str(b)] for s, (a, b) in sorted(self.table.items())}
        return out


_AFFINE_KINDS = ("identity", "percapita", "reciprocal-percapita", "shift", "q-weighted", "table")


def identity() -> AffineUtility:
    return AffineUtility("identity")


def percapita() -> AffineUtility:
    return AffineUtility("percapita")


def reciprocal_percapita() -> AffineUtility:
    return AffineUtility("reciprocal-percapita")


def shift(c) -> AffineUtility:
    return AffineUtility("shift", c=c)


def q_weighted(weights: Mapping[int, Fraction]) -> AffineUtility:
    return AffineUtility("q-weighted", weights=weights)


def table(coefficients: Mapping[int, tuple]) -> AffineUtility:
    return AffineUtility("table", table=coefficients)


@dataclass(frozen=True)
class GeneralUtility:
    """Monotone transforms given by black-box evaluators.

    ``forward(s, t)`` and ``inverse(s, y)`` must be pure and strictly
    increasing in their second argument. All transforms share the open range
    ``(lower, upper)``; endpoints may be infinite.
    """

    forward_fn: Callable[[int, float], float]
    inverse_fn: Callable[[int, float], float]
    lower: float = -math.inf
    upper: float = math.inf
    name: str = "general"

    exact = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise UtilityError("range must be a nonempty open interval")

    @property
    def range(self) -> tuple:
        return (self.lower, self.upper)

    @property
    def range_class(self) -> RangeClass:
        if self.lower < 0 < self.upper:
            return RangeClass.CONTAINS_ZERO
        if self.upper <= 0:
            return RangeClass.NEGATIVE
        return RangeClass.POSITIVE

    def in_range(self, y: float) -> bool:
        return self.lower < y < self.upper

    def forward(self, s: int, t) -> float:
        return float(self.forward_fn(s, float(t)))

    def inverse(self, s: int, y) -> float:
        y = float(y)
        if not self.in_range(y):
            raise OutOfRange(f"{y} is outside the utility range ({self.lower}, {self.upper})")
        return float(self.inverse_fn(s, y))

    def spot_check(self, coalitions: Sequence[int], points: Sequence[float] = (-10.0, -1.0, 0.0, 1.0, 10.0)):
        """Raise :class:`UtilityError` if monotonicity or the round trip visibly fails."""
        for s in coalitions:
            vals = [self.forward(s, t) for t in points]
            for lo, hi in zip(vals, vals[1:]):
                if not lo < hi:
                    raise UtilityError(f"utility of coalition {s} is not strictly increasing")
            for t, y in zip(points, vals):
                if self.in_range(y):
                    back = self.inverse(s, y)
                    if abs(back - t) > TAU_INV * max(1.0, abs(t)):
                        raise UtilityError(f"inverse of coalition {s} does not undo forward at {t}")
                elif not (self.lower <= y <= self.upper):
                    raise UtilityError(f"utility of coalition {s} leaves its declared range")

    def describe(self) -> dict:
        return {"kind": "general", "name": self.name, "range": [repr(self.lower), repr(self.upper)]}


def arctan_utility() -> GeneralUtility:
    return GeneralUtility(lambda s, t: math.atan(t), lambda s, y: math.tan(y),
                          -math.pi / 2, math.pi / 2, "arctan")


UtilityFamily = AffineUtility | GeneralUtility


def _check_nontrivial(game: Game, s: int):
    if s == 0 or s == game.grand:
        raise TrivialCoalition("utilities are only defined on nontrivial coalitions")


def u_excess(fam: UtilityFamily, game: Game, s: int, x: Sequence):
    """``u_S(v(S) - x(S))``; exact for affine families, float otherwise."""
    _check_nontrivial(game, s)
    e = game.excess(s, [to_fraction(v) for v in x]) if fam.exact else game.excess(s, x)
    return fam.forward(s, e)


def inverse_at(fam: UtilityFamily, s: int, y):
    """``u_S^{-1}(y)``. Raises :class:`OutOfRange` outside the common range."""
    return fam.inverse(s, y)


def linearized_constraint(fam: AffineUtility, game: Game, s: int, t=None) -> Constraint:
    """Row for ``u_S(v(S) - x(S)) <= t``.

    With ``t=None`` the level is an extra trailing variable and the row reads
    ``a_S x(S) + t >= a_S v(S) + b_S``. Otherwise it is ``x(S) >= v(S) - u_S^{-1}(t)``
    over the payoff variables only.
    """
    _check_nontrivial(game, s)
    if not fam.exact:
        raise UtilityError("linearized constraints need an affine utility")
    a, b = fam.coefficients(s)
    chi = [Fraction((s >> i) & 1) for i in range(game.n)]
    v = game.value(s)
    if t is None:
        return Constraint(tuple(a * c for c in chi) + (Fraction(1),), GE, a * v + b)
    return Constraint(tuple(chi), GE, v - fam.inverse(s, t))
