"""Exact rational linear programming.

A two-phase primal simplex with Bland's rule. The tableau is kept
fraction-free: every row is scaled to integers and pivots use Bareiss
updates, so arithmetic stays in Python ints and the result is exact.

Programs are stated over free variables with optional per-variable bounds.
Every result carries a certificate:

* ``OPTIMAL``: ``primal`` and multipliers ``dual`` (rows) / ``bound_dual``
  (variable bounds) with ``sum(dual_i * a_i) + bound terms == objective`` and
  ``sum(dual_i * b_i) + bound terms == objective_value``. For a minimisation
  the multiplier of a ``>=`` row is ``>= 0`` and of a ``<=`` row ``<= 0``;
  signs flip for maximisation.
* ``INFEASIBLE``: ``farkas`` / ``farkas_bounds`` with ``>= 0`` on ``>=`` rows,
  ``<= 0`` on ``<=`` rows, a zero combination of the left-hand sides and a
  positive combination of the right-hand sides.
* ``UNBOUNDED``: a feasible ``primal`` point and an improving ``ray``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .game import to_fraction

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = {LE: LE, EQ: EQ, GE: GE, "=": EQ}


class MalformedProgram(ValueError):
    pass


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    relation: str
    rhs: Fraction

    def __post_init__(self):
        rel = _RELATIONS.get(self.relation)
        if rel is None:
            raise MalformedProgram(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "coeffs", tuple(to_fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def activity(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, x) if a), Fraction(0))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        lhs = self.activity(x)
        if self.relation == LE:
            return lhs <= self.rhs
        if self.relation == GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class LinearProgram:
    objective: tuple
    constraints: tuple = ()
    sense: str = "min"
    lower: tuple | None = None
    upper: tuple | None = None

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise MalformedProgram(f"sense must be 'min' or 'max', not {self.sense!r}")
        obj = tuple(to_fraction(c) for c in self.objective)
        n = len(obj)
        rows = []
        for row in self.constraints:
            if not isinstance(row, Constraint):
                row = Constraint(*row)
            if len(row.coeffs) != n:
                raise MalformedProgram(
                    f"row has {len(row.coeffs)} coefficients but program has {n} variables")
            rows.append(row)
        lower = self._bounds(self.lower, n)
        upper = self._bounds(self.upper, n)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", tuple(rows))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @staticmethod
    def _bounds(b, n):
        if b is None:
            return (None,) * n
        if len(b) != n:
            raise MalformedProgram("bounds must have one entry per variable")
        return tuple(None if v is None else to_fraction(v) for v in b)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.num_vars:
            return False
        for v, lo, hi in zip(x, self.lower, self.upper):
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                return False
        return all(row.satisfied_by(x) for row in self.constraints)


@dataclass(frozen=True)
class LpSolution:
    status: Status
    primal: tuple | None = None
    objective_value: Fraction | None = None
    dual: tuple | None = None
    bound_dual: tuple | None = None  # per variable: (lower multiplier, upper multiplier)
    ray: tuple | None = None
    farkas: tuple | None = None
    farkas_bounds: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# Core: min c.x  s.t.  A x = b, x >= 0


@dataclass
class _Raw:
    status: Status
    x: list | None = None
    y: list | None = None
    ray: list | None = None
    farkas: list | None = None


def _int_scale(vals):
    """Positive rational ``s`` with ``s * vals`` coprime integers."""
    den = lcm(*(v.denominator for v in vals)) if vals else 1
    ints = [int(v * den) for v in vals]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
        return Fraction(den, g), ints
    return Fraction(den), ints


def _simplex(A: list, b: list, c: list) -> _Raw:
    m, n = len(A), len(c)
    flip = []
    rows = []
    rhs = []
    for i in range(m):
        if b[i] < 0:
            rows.append([-v for v in A[i]])
            rhs.append(-b[i])
            flip.append(-1)
        else:
            rows.append(list(A[i]))
            rhs.append(b[i])
            flip.append(1)

    # zero-cost columns with a single positive entry start in the basis
    unit = [None] * m
    for j in range(n):
        if c[j] != 0:
            continue
        nz = [i for i in range(m) if rows[i][j] != 0]
        if len(nz) == 1 and rows[nz[0]][j] > 0 and unit[nz[0]] is None:
            unit[nz[0]] = j

    row_scale = []
    M = []
    colscale = [Fraction(1)] * n
    for i in range(m):
        s, ints = _int_scale(rows[i] + [rhs[i]])
        row_scale.append(s)
        if unit[i] is not None:
            j = unit[i]
            colscale[j] = Fraction(ints[j])
            ints[j] = 1
        M.append(ints)
    art_rows = [i for i in range(m) if unit[i] is None]
    na = len(art_rows)
    ncols = n + na
    for row in M:
        r = row.pop()
        row.extend([0] * na)
        row.append(r)
    basis = list(unit)
    art_col_of_row = {}
    for k, i in enumerate(art_rows):
        M[i][n + k] = 1
        basis[i] = n + k
        art_col_of_row[i] = n + k
    unit_col = [unit[i] if unit[i] is not None else art_col_of_row[i] for i in range(m)]

    cost_scale, cints = _int_scale(list(c))
    obj2 = cints + [0] * na + [0]
    obj1 = [0] * (ncols + 1)
    for i in art_rows:
        row = M[i]
        for j in range(n):
            if row[j]:
                obj1[j] -= row[j]
        obj1[ncols] -= row[ncols]

    D = 1
    state = {"D": D}

    def pivot(r, s):
        Dv = state["D"]
        prow = M[r]
        p = prow[s]
        for i in range(m):
            if i == r:
                continue
            row = M[i]
            f = row[s]
            if f == 0:
                if p != Dv:
                    M[i] = [v * p // Dv for v in row]
            else:
                M[i] = [(v * p - f * w) // Dv for v, w in zip(row, prow)]
        for obj in (obj1, obj2):
            f = obj[s]
            if f == 0:
                if p != Dv:
                    obj[:] = [v * p // Dv for v in obj]
            else:
                obj[:] = [(v * p - f * w) // Dv for v, w in zip(obj, prow)]
        basis[r] = s
        if p < 0:
            for i in range(m):
                M[i] = [-v for v in M[i]]
            obj1[:] = [-v for v in obj1]
            obj2[:] = [-v for v in obj2]
            p = -p
        state["D"] = p

    def run(obj, allowed):
        while True:
            s = next((j for j in range(allowed) if obj[j] < 0), None)
            if s is None:
                return None
            r = None
            for i in range(m):
                a = M[i][s]
                if a > 0:
                    if r is None:
                        r, ba, bb = i, a, M[i][ncols]
                        continue
                    lhs = M[i][ncols] * ba
                    rhs_ = bb * a
                    if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[r]):
                        r, ba, bb = i, a, M[i][ncols]
            if r is None:
                return s
            pivot(r, s)

    def duals(obj, unit_cost):
        Dv = state["D"]
        out = []
        for i in range(m):
            j = unit_col[i]
            yi = Fraction(unit_cost(j)) - Fraction(obj[j], Dv)
            out.append(yi)
        return out

    if na:
        run(obj1, ncols)
        if obj1[ncols] != 0:
            y1 = duals(obj1, lambda j: 1 if j >= n else 0)
            farkas = [flip[i] * row_scale[i] * y1[i] for i in range(m)]
            return _Raw(Status.INFEASIBLE, farkas=farkas)
        for i in range(m):
            if basis[i] >= n:
                j = next((j for j in range(n) if M[i][j] != 0), None)
                if j is not None:
                    pivot(i, j)

    s = run(obj2, n)
    Dv = state["D"]
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = Fraction(M[i][ncols], Dv) / colscale[basis[i]]
    if s is not None:
        ray = [Fraction(0)] * n
        ray[s] = 1 / colscale[s]
        for i in range(m):
            if basis[i] < n and M[i][s]:
                ray[basis[i]] = -Fraction(M[i][s], Dv) / colscale[basis[i]]
        return _Raw(Status.UNBOUNDED, x=x, ray=ray)
    y2 = duals(obj2, lambda j: 0)
    y = [flip[i] * row_scale[i] * y2[i] / cost_scale for i in range(m)]
    return _Raw(Status.OPTIMAL, x=x, y=y)


# ---------------------------------------------------------------------------
# Reductions of a general program (free variables, any relation) to the core


def _route_primal(c, rows, native):
    """Standard form with split free variables and slack columns."""
    n = len(c)
    cols = []  # (var, sign)
    for j in range(n):
        cols.append((j, 1))
        if j not in native:
            cols.append((j, -1))
    nslack = sum(1 for _, rel, _ in rows if rel != EQ)
    A, b = [], []
    k = 0
    for a, rel, rhs in rows:
        line = [a[j] * sgn for j, sgn in cols] + [Fraction(0)] * nslack
        if rel == LE:
            line[len(cols) + k] = Fraction(1)
            k += 1
        elif rel == GE:
            line[len(cols) + k] = Fraction(-1)
            k += 1
        A.append(line)
        b.append(rhs)
    cost = [c[j] * sgn for j, sgn in cols] + [Fraction(0)] * nslack
    raw = _simplex(A, b, cost)

    def fold(vec):
        out = [Fraction(0)] * n
        for (j, sgn), v in zip(cols, vec):
            out[j] += sgn * v
        return out

    def reduced(y, base):
        mu = {}
        for j in native:
            mu[j] = base[j] - sum((y[i] * rows[i][0][j] for i in range(len(rows))), Fraction(0))
        return mu

    if raw.status is Status.OPTIMAL:
        return Status.OPTIMAL, fold(raw.x), raw.y, reduced(raw.y, c), None, None, None
    if raw.status is Status.UNBOUNDED:
        return Status.UNBOUNDED, fold(raw.x), None, None, fold(raw.ray), None, None
    return Status.INFEASIBLE, None, None, None, None, raw.farkas, reduced(raw.farkas, [Fraction(0)] * n)


def _route_dual(c, rows):
    """Solve the dual program in standard form: one row per variable."""
    n = len(c)
    norm = []
    for a, rel, rhs in rows:
        if rel == LE:
            norm.append(([-v for v in a], GE, -rhs, -1))
        else:
            norm.append((list(a), rel, rhs, 1))
    cols = []  # (row index, sign)
    for i, (_, rel, _, _) in enumerate(norm):
        cols.append((i, 1))
        if rel == EQ:
            cols.append((i, -1))
    H = [[norm[i][0][j] * sgn for i, sgn in cols] for j in range(n)]
    g = [-norm[i][2] * sgn for i, sgn in cols]

    def fold(vec):
        out = [Fraction(0)] * len(rows)
        for (i, sgn), v in zip(cols, vec):
            out[i] += sgn * v
        return [out[i] * norm[i][3] for i in range(len(rows))]

    raw = _simplex(H, list(c), g)
    if raw.status is Status.OPTIMAL:
        x = [-w for w in raw.y]
        return Status.OPTIMAL, x, fold(raw.x), None, None
    if raw.status is Status.UNBOUNDED:
        return Status.INFEASIBLE, None, None, None, fold(raw.ray)
    ray = [-f for f in raw.farkas]
    feas = _simplex(H, [Fraction(0)] * n, g)
    if feas.status is Status.UNBOUNDED:
        return Status.INFEASIBLE, None, None, None, fold(feas.ray)
    x = [-w for w in feas.y]
    return Status.UNBOUNDED, x, None, ray, None


def solve(lp: LinearProgram, method: str = "auto") -> LpSolution:
    """Solve ``lp`` exactly.

    ``method`` picks the reduction: ``"primal"`` pivots on a tableau with one
    row per constraint, ``"dual"`` on the dual program with one row per
    variable, ``"auto"`` uses whichever tableau is shorter.
    """
    if not isinstance(lp, LinearProgram):
        raise MalformedProgram("expected a LinearProgram")
    n = lp.num_vars
    sign = 1 if lp.sense == "min" else -1
    c = [sign * v for v in lp.objective]
    rows = [(list(r.coeffs), r.relation, r.rhs) for r in lp.constraints]
    m_user = len(rows)
    native = set()
    bound_rows = []
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        unit = [Fraction(0)] * n
        unit[j] = Fraction(1)
        if lo == 0 and hi is None:
            native.add(j)
            continue
        if lo is not None:
            rows.append((unit, GE, lo))
            bound_rows.append((j, 0))
        if hi is not None:
            rows.append((list(unit), LE, hi))
            bound_rows.append((j, 1))

    if method == "auto":
        method = "dual" if n < len(rows) else "primal"
    if method not in ("primal", "dual"):
        raise MalformedProgram(f"unknown method {method!r}")

    if method == "primal":
        status, x, y, mu, ray, farkas, fmu = _route_primal(c, rows, native)
    else:
        all_rows = list(rows)
        native_rows = []
        for j in sorted(native):
            unit = [Fraction(0)] * n
            unit[j] = Fraction(1)
            all_rows.append((unit, GE, Fraction(0)))
            native_rows.append(j)
        status, x, y_all, ray, farkas_all = _route_dual(c, all_rows)
        nr = len(rows)
        mu = fmu = y = farkas = None
        if y_all is not None:
            y = y_all[:nr]
            mu = dict(zip(native_rows, y_all[nr:]))
        if farkas_all is not None:
            farkas = farkas_all[:nr]
            fmu = dict(zip(native_rows, farkas_all[nr:]))

    def split(vec, nat, scale):
        if vec is None:
            return None, None
        bd = [[Fraction(0), Fraction(0)] for _ in range(n)]
        for (j, kind), v in zip(bound_rows, vec[m_user:]):
            bd[j][kind] += scale * v
        for j, v in (nat or {}).items():
            bd[j][0] += scale * v
        return tuple(scale * v for v in vec[:m_user]), tuple(tuple(p) for p in bd)

    if status is Status.OPTIMAL:
        dual, bdual = split(y, mu, sign)
        value = sum((a * v for a, v in zip(lp.objective, x)), Fraction(0))
        return LpSolution(Status.OPTIMAL, tuple(x), value, dual, bdual)
    if status is Status.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, tuple(x), ray=tuple(ray))
    fk, fb = split(farkas, fmu, 1)
    return LpSolution(Status.INFEASIBLE, farkas=fk, farkas_bounds=fb)


def optimize_direction(rows: Sequence, direction: Sequence, sense: str = "max",
                       method: str = "auto") -> LpSolution:
    """Optimise a linear functional over the polyhedron cut out by ``rows``."""
    return solve(LinearProgram(tuple(direction), tuple(rows), sense), method)
