"""Brute-force LP optimum by enumerating every basic solution (tests only).

Independent of the simplex code: every choice of ``n`` constraints
(rows or variable bounds) is made tight, the square system is solved with
Fractions, and the best feasible point is kept.
"""

from fractions import Fraction
from itertools import combinations

from knaplp.exactlp import LpProblem, Rel
from knaplp.instance import INF, KnapsackInstance


def _solve(mat, rhs):
    n = len(mat)
    aug = [list(row) + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def _feasible(p: LpProblem, x) -> bool:
    for v, lo, hi in zip(x, p.lower, p.upper):
        if v < lo or (hi is not INF and v > hi):
            return False
    for row in p.rows:
        act = sum(a * x[j] for j, a in row.coeffs)
        if row.rel is Rel.LE and act > row.rhs or row.rel is Rel.GE and act < row.rhs:
            return False
        if row.rel is Rel.EQ and act != row.rhs:
            return False
    return True


def vertices(p: LpProblem):
    n = p.num_vars
    cons = []
    for row in p.rows:
        vec = [Fraction(0)] * n
        for j, a in row.coeffs:
            vec[j] = Fraction(a)
        cons.append((vec, Fraction(row.rhs)))
    for j in range(n):
        unit = [Fraction(int(i == j)) for i in range(n)]
        cons.append((unit, Fraction(p.lower[j])))
        if p.upper[j] is not INF:
            cons.append((unit, Fraction(p.upper[j])))
    seen = set()
    for pick in combinations(cons, n):
        x = _solve([v for v, _ in pick], [r for _, r in pick])
        if x is not None and tuple(x) not in seen and _feasible(p, x):
            seen.add(tuple(x))
            yield tuple(x)


def lp_optimum(p: LpProblem):
    """Best objective value over all vertices, or ``None`` if there is no vertex."""
    best = None
    for x in vertices(p):
        v = sum(Fraction(c) * xi for c, xi in zip(p.objective, x))
        if best is None or (v > best if p.maximize else v < best):
            best = v
    return best


def knapsack_lp(inst: KnapsackInstance) -> LpProblem:
    p = LpProblem(maximize=inst.packing)
    for i in range(inst.n):
        p.add_var(f"x{i}", inst.c[i], 0, inst.d[i])
    rel = "<=" if inst.packing else ">="
    for row, bj in zip(inst.A, inst.b):
        p.add_row(list(enumerate(row)), rel, bj)
    return p
