"""Exact rational LP solver returning optimal basic (extreme-point) solutions.

A two-phase, bounded-variable primal simplex over a sparse tableau.  All
arithmetic is exact; internally values are ``gmpy2.mpq`` for speed and are
handed back as :class:`fractions.Fraction`.  Every variable has a finite
lower bound and an upper bound that may be :data:`INF`.

Pivoting defaults to Bland's smallest-index rule.  The ``"dantzig"`` rule
picks the most negative reduced cost but falls back to Bland for as long
as pivots stay degenerate, which keeps it cycle-free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

from .instance import INF, Unbounded

_mpq = gmpy2.mpq
_ZERO = _mpq(0)


class Rel(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _frac(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, Fraction], ...]
    rel: Rel
    rhs: Fraction

    def activity(self, x: Sequence) -> Fraction:
        return sum((a * x[j] for j, a in self.coeffs), Fraction(0))

    def holds(self, x: Sequence) -> bool:
        lhs = self.activity(x)
        if self.rel is Rel.LE:
            return lhs <= self.rhs
        if self.rel is Rel.GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class LpProblem:
    """``max``/``min`` of ``objective . x`` over sparse rows and variable bounds."""

    maximize: bool = True
    objective: list[Fraction] = field(default_factory=list)
    lower: list[Fraction] = field(default_factory=list)
    upper: list[Fraction | Unbounded] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_var(self, name: str = "", obj=0, lower=0, upper=INF) -> int:
        self.objective.append(Fraction(obj))
        self.lower.append(Fraction(lower))
        self.upper.append(INF if upper is INF else Fraction(upper))
        self.names.append(name or f"v{len(self.names)}")
        return len(self.objective) - 1

    def add_row(self, coeffs: Mapping[int, object] | Iterable[tuple[int, object]], rel, rhs) -> int:
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, Fraction] = {}
        for j, a in items:
            merged[j] = merged.get(j, Fraction(0)) + Fraction(a)
        clean = tuple(sorted((j, a) for j, a in merged.items() if a != 0))
        self.rows.append(Row(clean, Rel(rel), Fraction(rhs)))
        return len(self.rows) - 1

    def validate(self) -> None:
        nv = self.num_vars
        if not (len(self.lower) == len(self.upper) == len(self.names) == nv):
            raise ValueError("inconsistent variable dimensions")
        for j, (lo, up) in enumerate(zip(self.lower, self.upper)):
            if up is not INF and lo > up:
                raise ValueError(f"variable {self.names[j]}: lower bound exceeds upper bound")
        for i, row in enumerate(self.rows):
            for j, _ in row.coeffs:
                if not 0 <= j < nv:
                    raise ValueError(f"row {i}: unknown variable index {j}")

    def constraint_text(self) -> str:
        """LP-text rendering of bounds and rows only (the objective is left out)."""
        lines = ["subject to"]
        for i, row in enumerate(self.rows):
            terms = " ".join(f"{_signed(a)} {self.names[j]}" for j, a in row.coeffs) or "0"
            lines.append(f"  r{i}: {terms} {row.rel.value} {row.rhs}")
        lines.append("bounds")
        for j in range(self.num_vars):
            up = "inf" if self.upper[j] is INF else str(self.upper[j])
            lines.append(f"  {self.lower[j]} <= {self.names[j]} <= {up}")
        return "\n".join(lines) + "\n"

    def to_lp_text(self) -> str:
        head = "maximize" if self.maximize else "minimize"
        obj = " ".join(f"{_signed(c)} {self.names[j]}" for j, c in enumerate(self.objective) if c)
        return f"{head}\n  obj: {obj or '0'}\n" + self.constraint_text() + "end\n"


def _signed(a: Fraction) -> str:
    return f"+{a}" if a >= 0 else f"-{-a}"


@dataclass(frozen=True)
class Violation:
    kind: str  # "row", "lower" or "upper"
    index: int


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: tuple[Fraction, ...] = ()
    value: Fraction | None = None
    basis: tuple[tuple[str, int], ...] = ()
    at_upper: tuple[int, ...] = ()
    tight_rows: tuple[int, ...] = ()
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def check_point(p: LpProblem, x: Sequence) -> Violation | None:
    """First violated bound or row of ``x`` (bounds are checked first), or ``None``."""
    if len(x) != p.num_vars:
        raise ValueError("dimension mismatch")
    for j, xj in enumerate(x):
        if xj < p.lower[j]:
            return Violation("lower", j)
        if p.upper[j] is not INF and xj > p.upper[j]:
            return Violation("upper", j)
    for i, row in enumerate(p.rows):
        if not row.holds(x):
            return Violation("row", i)
    return None


def count_fractional(x: Iterable) -> int:
    return sum(1 for v in x if Fraction(v).denominator != 1)


class _Tableau:
    """Sparse simplex tableau: row ``i`` reads ``x[basis[i]] + sum t[i][j] x[j] = const``."""

    def __init__(self, lower, upper, rows, basis, val):
        self.lower = lower
        self.upper = upper  # None means +inf
        self.rows = rows
        self.basis = basis
        self.val = val
        self.cols: dict[int, set[int]] = {}
        for i, row in enumerate(rows):
            for j in row:
                self.cols.setdefault(j, set()).add(i)
        self.dj: dict[int, object] = {}
        self.pivots = 0

    def price(self, cost: dict[int, object]) -> None:
        """Reduced costs of all nonbasic columns for the (minimized) ``cost``."""
        dj: dict[int, object] = {}
        for j in self.cols:
            cj = cost.get(j)
            if cj:
                dj[j] = cj
        for i, row in enumerate(self.rows):
            cb = cost.get(self.basis[i])
            if not cb:
                continue
            for j, t in row.items():
                v = dj.get(j, _ZERO) - cb * t
                if v:
                    dj[j] = v
                else:
                    dj.pop(j, None)
        basic = set(self.basis)
        for j in list(cost):
            if j not in basic and j not in self.cols and cost[j]:
                dj[j] = cost[j]
        self.dj = dj

    def _entering(self, bland: bool):
        lower, upper, val = self.lower, self.upper, self.val
        best = None
        best_mag = None
        for j in (sorted(self.dj) if bland else self.dj):
            d = self.dj[j]
            up = upper[j]
            if up is not None and up == lower[j]:
                continue
            if d < 0 and (up is None or val[j] < up):
                direction = 1
            elif d > 0 and val[j] > lower[j]:
                direction = -1
            else:
                continue
            if bland:
                return j, direction
            mag = abs(d)
            if best is None or mag > best_mag or (mag == best_mag and j < best[0]):
                best, best_mag = (j, direction), mag
        return best

    def iterate(self, rule: str) -> bool:
        """Run simplex pivots to optimality.  Returns ``False`` if unbounded."""
        lower, upper, val, basis = self.lower, self.upper, self.val, self.basis
        degenerate = False
        while True:
            choice = self._entering(rule == "bland" or degenerate)
            if choice is None:
                return True
            q, direction = choice
            theta = None
            leave = None  # row index, or -1 for a bound flip
            up_q = upper[q]
            if up_q is not None:
                theta, leave = up_q - lower[q], -1
            for i in self.cols.get(q, ()):
                rate = -self.rows[i][q] * direction
                b = basis[i]
                if rate < 0:
                    lim = (val[b] - lower[b]) / (-rate)
                elif upper[b] is not None:
                    lim = (upper[b] - val[b]) / rate
                else:
                    continue
                if theta is None or lim < theta or (
                    lim == theta and leave != -1 and b < basis[leave]
                ):
                    theta, leave = lim, i
            if theta is None:
                return False
            degenerate = theta == 0
            if theta:
                step = theta * direction
                val[q] += step
                for i in self.cols.get(q, ()):
                    val[basis[i]] -= self.rows[i][q] * step
            if leave == -1:
                continue
            b = basis[leave]
            rate = -self.rows[leave][q] * direction
            val[b] = lower[b] if rate < 0 else upper[b]
            self.pivot(leave, q)

    def pivot(self, r: int, q: int) -> None:
        rows, cols = self.rows, self.cols
        prow = rows[r]
        piv = prow.pop(q)
        old = self.basis[r]
        inv = 1 / _mpq(piv)
        new = {j: t * inv for j, t in prow.items()}
        new[old] = inv
        rows[r] = new
        self.basis[r] = q

        touched = cols.pop(q)
        touched.discard(r)
        cols[old] = {r}

        for i in touched:
            row = rows[i]
            alpha = row.pop(q)
            for j, t in new.items():
                v = row.get(j, _ZERO) - alpha * t
                if v:
                    if j not in row:
                        cols[j].add(i)
                    row[j] = v
                elif j in row:
                    del row[j]
                    cols[j].discard(i)
        dq = self.dj.pop(q, None)
        if dq:
            dj = self.dj
            for j, t in new.items():
                v = dj.get(j, _ZERO) - dq * t
                if v:
                    dj[j] = v
                else:
                    dj.pop(j, None)
        self.pivots += 1


def solve_lp(p: LpProblem, rule: str = "bland") -> LpSolution:
    """Solve ``p`` exactly; when optimal the returned point is a basic solution."""
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    p.validate()
    nv = p.num_vars
    lower = [_mpq(v) for v in p.lower]
    upper = [None if v is INF else _mpq(v) for v in p.upper]
    for j in range(nv):
        if upper[j] is not None and upper[j] < lower[j]:
            return LpSolution(Status.INFEASIBLE)
    val = list(lower)

    rows: list[dict] = []
    basis: list[int] = []
    artificials: list[int] = []
    labels: list[tuple] = [("x", j) for j in range(nv)]
    for i, prow in enumerate(p.rows):
        coeffs = {j: _mpq(a) for j, a in prow.coeffs}
        rhs = _mpq(prow.rhs)
        if not coeffs:
            if not prow.holds([0] * nv):
                return LpSolution(Status.INFEASIBLE)
            continue
        resid = rhs - sum(a * val[j] for j, a in coeffs.items())
        sigma = {Rel.LE: 1, Rel.GE: -1, Rel.EQ: 0}[prow.rel]
        if sigma:
            s = len(lower)
            lower.append(_ZERO)
            upper.append(None)
            val.append(_ZERO)
            labels.append(("slack", i))
            if sigma * resid >= 0:
                # slack absorbs the residual: s + sigma*a.x = sigma*rhs
                row = {j: sigma * a for j, a in coeffs.items() if j != s}
                val[s] = sigma * resid
                rows.append(row)
                basis.append(s)
                continue
            coeffs[s] = _mpq(sigma)
        sgn = 1 if resid >= 0 else -1
        art = len(lower)
        lower.append(_ZERO)
        upper.append(None)
        val.append(abs(resid))
        labels.append(("art", i))
        artificials.append(art)
        rows.append({j: sgn * a for j, a in coeffs.items()})
        basis.append(art)

    tab = _Tableau(lower, upper, rows, basis, val)
    if artificials:
        tab.price({a: _mpq(1) for a in artificials})
        tab.iterate(rule)
        if any(val[a] for a in artificials):
            return LpSolution(Status.INFEASIBLE, pivots=tab.pivots)
        for a in artificials:
            upper[a] = _ZERO
            if a in tab.cols:
                for i in tab.cols.pop(a):
                    del tab.rows[i][a]

    sign = -1 if p.maximize else 1
    cost = {j: sign * _mpq(c) for j, c in enumerate(p.objective) if c}
    tab.price(cost)
    if not tab.iterate(rule):
        return LpSolution(Status.UNBOUNDED, pivots=tab.pivots)

    x = tuple(_frac(v) for v in val[:nv])
    value = sum((c * xj for c, xj in zip(p.objective, x)), Fraction(0))
    nonbasic = set(range(len(lower))) - set(tab.basis)
    at_upper = tuple(
        sorted(j for j in nonbasic if j < nv and upper[j] is not None and val[j] == upper[j]
               and upper[j] != lower[j])
    )
    tight = tuple(i for i, row in enumerate(p.rows) if row.rel is Rel.EQ or row.activity(x) == row.rhs)
    return LpSolution(
        Status.OPTIMAL,
        x=x,
        value=value,
        basis=tuple(labels[j] for j in tab.basis),
        at_upper=at_upper,
        tight_rows=tight,
        pivots=tab.pivots,
    )


def _solve_square(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Exact Gauss-Jordan solve of a square system; ``None`` if singular."""
    m = len(mat)
    aug = [list(r) + [v] for r, v in zip(mat, rhs)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pr = aug[col]
        inv = 1 / pr[col]
        for r in range(m):
            f = aug[r][col]
            if r != col and f:
                row = aug[r]
                for c in range(col, m + 1):
                    if pr[c]:
                        row[c] -= f * inv * pr[c]
    return [aug[r][m] / aug[r][r] for r in range(m)]


def verify_optimal(p: LpProblem, sol: LpSolution) -> bool:
    """Independent check that ``sol`` is an optimal basic solution of ``p``.

    Recomputes the row duals from the reported basis by dense exact
    elimination, then checks primal feasibility, that every nonbasic column
    sits at a bound, and that every reduced cost has the sign optimality
    requires.  Cubic in the row count, so meant for small problems.
    """
    if not sol.optimal or check_point(p, sol.x) is not None:
        return False
    rows = [i for i, r in enumerate(p.rows) if r.coeffs]
    pos = {i: t for t, i in enumerate(rows)}
    m = len(rows)
    if len(sol.basis) != m:
        return False
    columns: dict[tuple, dict[int, Fraction]] = {}
    cost: dict[tuple, Fraction] = {}
    for j in range(p.num_vars):
        columns[("x", j)] = {}
        cost[("x", j)] = p.objective[j]
    for i, row in enumerate(p.rows):
        for j, a in row.coeffs:
            if i in pos:
                columns[("x", j)][pos[i]] = a
        if i in pos:
            if row.rel is not Rel.EQ:
                columns[("slack", i)] = {pos[i]: Fraction(1 if row.rel is Rel.LE else -1)}
                cost[("slack", i)] = Fraction(0)
            columns[("art", i)] = {pos[i]: Fraction(1)}
            cost[("art", i)] = Fraction(0)
    basic = list(sol.basis)
    if any(label not in columns for label in basic):
        return False
    # B^T pi = c_B
    mat = [[columns[label].get(t, Fraction(0)) for t in range(m)] for label in basic]
    pi = _solve_square(mat, [cost[label] for label in basic]) if m else []
    if pi is None:
        return False
    sign = 1 if p.maximize else -1
    basic_set = set(basic)
    for label, col in columns.items():
        if label in basic_set or label[0] == "art":
            continue
        r = cost[label] - sum(pi[t] * a for t, a in col.items())
        r *= sign
        if label[0] == "x":
            j = label[1]
            lo, up = p.lower[j], p.upper[j]
            at_lo = sol.x[j] == lo
            at_up = up is not INF and sol.x[j] == up
        else:
            row = p.rows[label[1]]
            at_lo = row.activity(sol.x) == row.rhs
            at_up = False
        if not (at_lo or at_up):
            return False
        if at_lo and at_up:
            continue
        if at_lo and r > 0:
            return False
        if at_up and r < 0:
            return False
    return True
