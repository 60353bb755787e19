"""Packing LP with gap ``1 + eps`` whose constraints do not depend on the costs.

Instead of the most profitable items, a guess is a tuple ``(g^1, ..., g^k)``
where ``g^i`` is the multiset of the ``gamma`` items of a solution with the
largest coefficients in row ``i``.  Items are compared per row by
``(A[i][j], j)``, so ties go to the larger index.  Each tuple cuts out a
polytope, the hull of their union is one LP, and an extreme point of it is
repaired by rounding up and then deleting a cheapest set of at most ``k``
items per violated row.

Unlike the other pipelines this module works in the instance's own item
order: sorting by cost would make the constraint system depend on ``c``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .disjunctive import fixed_point_feasible
from .errors import ContractViolation, Infeasible
from .exactlp import LpProblem, Status, check_point, count_fractional, solve_lp
from .instance import (
    InstanceError,
    IntegralSolution,
    KnapsackInstance,
    NormalizedInstance,
    format_rational,
)
from .rounding import round_up

log = logging.getLogger(__name__)


def _plain(inst: KnapsackInstance | NormalizedInstance) -> KnapsackInstance:
    base = inst.base if isinstance(inst, NormalizedInstance) else inst
    if not base.packing:
        raise InstanceError("the cost-independent LP exists for packing instances only")
    if not base.bounded:
        raise ContractViolation("finite d required; apply cap_unbounded first")
    return base


def row_order(inst: KnapsackInstance, i: int) -> list[int]:
    """Items of row ``i`` from smallest to largest under ``(A[i][j], j)``."""
    return sorted(range(inst.n), key=lambda j: (inst.A[i][j], j))


def is_whole(g: Sequence[int], gamma: int) -> bool:
    """A part below ``gamma`` (or empty) is the entire solution and pins every coordinate."""
    return sum(g) < gamma or not any(g)


def pivot_item(order: Sequence[int], g: Sequence[int]) -> Optional[int]:
    """Smallest item of ``g``'s support in the given row order."""
    return next((j for j in order if g[j] > 0), None)


@dataclass(frozen=True)
class GuessTuple:
    parts: tuple[tuple[int, ...], ...]
    pivots: tuple[Optional[int], ...]

    def to_dict(self) -> dict:
        return {"parts": [list(g) for g in self.parts],
                "pivots": [None if v is None else v + 1 for v in self.pivots]}


def _bounded_vectors(inst: KnapsackInstance, gamma: int) -> list[tuple[int, ...]]:
    """All ``0 <= g <= d`` with ``|g|_1 <= gamma`` and ``Ag <= b``, lexicographically."""
    out = []
    for g in itertools.product(*(range(min(di, gamma) + 1) for di in inst.d)):
        if sum(g) <= gamma and all(a <= bj for a, bj in zip(inst.row_activity(g), inst.b)):
            out.append(g)
    return out


def _fixings(inst: KnapsackInstance, parts, pivots, gamma: int):
    """Per-coordinate fixed values and lower bounds implied by a tuple, or ``None`` if contradictory."""
    n = inst.n
    fixed: dict[int, int] = {}
    low = [0] * n
    for i, g in enumerate(parts):
        if is_whole(g, gamma):
            pins = range(n)
        else:
            order = row_order(inst, i)
            pins = order[order.index(pivots[i]) + 1:]
        for j in pins:
            if fixed.setdefault(j, g[j]) != g[j]:
                return None
        for j in range(n):
            low[j] = max(low[j], g[j])
    if any(low[j] > v for j, v in fixed.items()):
        return None
    return fixed, low


def enumerate_tuples(inst: KnapsackInstance | NormalizedInstance, gamma: int) -> Iterator[GuessTuple]:
    """All consistent guess tuples, each once, in lexicographic order.

    Each part is a valid guess on its own (``0 <= g^i <= d``,
    ``|g^i|_1 <= gamma``, ``A g^i <= b``).  A tuple is dropped when its
    polytope is empty for a reason visible without solving: parts of
    different kinds (a part below ``gamma`` fixes the whole point), clashing
    fixings, or lower bounds that already break a row.
    """
    inst = _plain(inst)
    k = inst.k
    if k == 0:
        yield GuessTuple((), ())
        return
    vectors = _bounded_vectors(inst, gamma)
    orders = [row_order(inst, i) for i in range(k)]
    for parts in itertools.product(vectors, repeat=k):
        small = [is_whole(g, gamma) for g in parts]
        if any(small) and not all(g == parts[0] for g in parts):
            continue
        pivots = tuple(None if s else pivot_item(orders[i], parts[i]) for i, s in enumerate(small))
        fx = _fixings(inst, parts, pivots, gamma)
        if fx is None:
            continue
        _, low = fx
        if not all(a <= bj for a, bj in zip(inst.row_activity(low), inst.b)):
            continue
        yield GuessTuple(tuple(parts), pivots)


def tuple_polytope(
    inst: KnapsackInstance | NormalizedInstance, T: GuessTuple, gamma: int, cost=None
) -> LpProblem:
    """``Ay <= b``, ``0 <= y <= d`` plus the fixings and lower bounds of ``T``.

    For a part of size ``gamma``, items above its pivot are pinned to the
    part and the pivot is bounded below by it; a smaller part pins every
    coordinate.  ``cost`` only sets the objective.
    """
    inst = _plain(inst)
    n = inst.n
    p = LpProblem(maximize=True)
    for j in range(n):
        p.add_var(f"y{j + 1}", 0 if cost is None else cost[j], 0, inst.d[j])
    for row, bj in zip(inst.A, inst.b):
        p.add_row(enumerate(row), "<=", bj)
    for i, g in enumerate(T.parts):
        if is_whole(g, gamma):
            for j in range(n):
                p.add_row([(j, 1)], "=", g[j])
            continue
        order = row_order(inst, i)
        at = order.index(T.pivots[i])
        p.add_row([(order[at], 1)], ">=", g[order[at]])
        for j in order[at + 1:]:
            p.add_row([(j, 1)], "=", g[j])
    return p


def true_tuple(inst: KnapsackInstance, x: Sequence[int], gamma: int) -> GuessTuple:
    """Per-row top-``gamma`` multisets of an integral solution ``x``."""
    parts, pivots = [], []
    for i in range(inst.k):
        g = [0] * inst.n
        left = gamma
        for j in reversed(row_order(inst, i)):
            take = min(left, x[j])
            g[j] = take
            left -= take
        parts.append(tuple(g))
        pivots.append(None if is_whole(g, gamma) else pivot_item(row_order(inst, i), g))
    return GuessTuple(tuple(parts), tuple(pivots))


@dataclass
class CostfreeLp:
    tuples: list[GuessTuple]
    members: list[LpProblem]
    lp: LpProblem
    y: list[int]
    yt_of: list[list[int]] = field(default_factory=list)
    lam: list[int] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return self.lp.num_vars

    @property
    def num_rows(self) -> int:
        return self.lp.num_rows

    def constraint_text(self) -> str:
        return self.lp.constraint_text()


def build_costfree_lp(
    inst: KnapsackInstance | NormalizedInstance, gamma: int, cost=None
) -> CostfreeLp:
    """Hull of all tuple polytopes: ``y = sum y^T``, ``sum lambda^T = 1`` and per tuple
    its rows with right-hand sides and bounds scaled by ``lambda^T``.

    The constraint system is a function of ``(A, b, d, gamma)`` only;
    ``cost`` (default: the instance's ``c``) enters the objective alone.
    """
    inst = _plain(inst)
    cost = inst.c if cost is None else cost
    n = inst.n
    tuples = list(enumerate_tuples(inst, gamma))
    members = [tuple_polytope(inst, T, gamma) for T in tuples]
    p = LpProblem(maximize=True)
    y = [p.add_var(f"y{j + 1}", cost[j]) for j in range(n)]
    out = CostfreeLp(tuples, members, p, y)
    for t in range(len(tuples)):
        out.yt_of.append([p.add_var(f"y{j + 1}_T{t}") for j in range(n)])
        out.lam.append(p.add_var(f"lam_T{t}"))
    for j in range(n):
        p.add_row([(y[j], 1)] + [(ys[j], -1) for ys in out.yt_of], "=", 0)
    p.add_row([(lam, 1) for lam in out.lam], "=", 1)
    for t, member in enumerate(members):
        ys, lam = out.yt_of[t], out.lam[t]
        for row in member.rows:
            p.add_row([(ys[j], a) for j, a in row.coeffs] + [(lam, -row.rhs)], row.rel, 0)
        for j in range(n):
            p.add_row([(ys[j], 1), (lam, -member.upper[j])], "<=", 0)
    return out


def _deletion_sets(yhat: Sequence[int], k: int, exact: bool):
    support = [j for j, v in enumerate(yhat) if v > 0]
    total = sum(yhat)
    sizes = [min(k, total)] if exact else range(0, k + 1)
    for s in sizes:
        for combo in itertools.combinations_with_replacement(support, s):
            counts = {}
            for j in combo:
                counts[j] = counts.get(j, 0) + 1
            if all(cnt <= yhat[j] for j, cnt in counts.items()):
                yield combo


def cheapest_deletion(
    inst: KnapsackInstance, yhat: Sequence[int], row: int, exact_k: bool = False
) -> tuple[int, ...]:
    """Cheapest multiset (at most ``k`` items, or exactly ``k`` with ``exact_k``) whose
    removal from ``yhat`` restores row ``row``; ties go to the smaller size, then to the
    lexicographically smallest sorted index list.
    """
    a, bj = inst.A[row], inst.b[row]
    load = sum(ai * v for ai, v in zip(a, yhat))
    best, best_key = None, None
    for combo in _deletion_sets(yhat, inst.k, exact_k):
        if load - sum(a[j] for j in combo) > bj:
            continue
        key = (sum((inst.c[j] for j in combo), Fraction(0)), len(combo), combo)
        if best_key is None or key < best_key:
            best, best_key = combo, key
    if best is None:
        raise ContractViolation(f"no deletion set of size <= {inst.k} restores row {row}")
    return best


def repair(
    inst: KnapsackInstance | NormalizedInstance,
    T: GuessTuple,
    y: Sequence,
    gamma: int,
    exact_k: bool = False,
) -> IntegralSolution:
    """Round ``y`` up, then drop a cheapest restoring set per violated row.

    ``y`` must be an extreme point of ``T``'s polytope.  The result keeps at
    least ``(1 - k^2/gamma)`` of ``c.y``, which is asserted exactly.
    """
    inst = _plain(inst)
    y = tuple(Fraction(v) for v in y)
    if check_point(tuple_polytope(inst, T, gamma), y) is not None:
        raise ContractViolation("point is not in the tuple polytope")
    if count_fractional(y) > inst.k:
        raise ContractViolation(f"{count_fractional(y)} fractional coordinates exceed k={inst.k}")
    yhat = round_up(y)
    drop = [0] * inst.n
    for i, (act, bj) in enumerate(zip(inst.row_activity(yhat), inst.b)):
        if act > bj:
            counts = [0] * inst.n
            for j in cheapest_deletion(inst, yhat, i, exact_k):
                counts[j] += 1
            drop = [max(u, v) for u, v in zip(drop, counts)]
    z = IntegralSolution.of(inst, [v - dv for v, dv in zip(yhat, drop)])
    if not inst.is_feasible(z.x):
        raise ContractViolation("repaired point is infeasible")
    if gamma > 0 and z.value < (1 - Fraction(inst.k**2, gamma)) * inst.value(y):
        raise ContractViolation("repair lost more than k^2/gamma of the value")
    return z


def gamma_for_costfree(k: int, epsilon) -> int:
    """``ceil(k^2 / epsilon)``, at least 1."""
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return max(1, math.ceil(Fraction(k * k) / eps))


@dataclass(frozen=True)
class CostfreeResult:
    value: Fraction
    solution: IntegralSolution
    gamma: int
    active: GuessTuple
    y: tuple[Fraction, ...]
    num_tuples: int
    lp_vars: Optional[int] = None
    lp_rows: Optional[int] = None
    fallback_used: bool = False

    def report(self) -> dict:
        return {
            "gamma": self.gamma,
            "num_tuples": self.num_tuples,
            "lp_vars": self.lp_vars,
            "lp_rows": self.lp_rows,
            "lp_value": str(self.value),
            "active_tuple": self.active.to_dict(),
            "y": [format_rational(v) for v in self.y],
            "rounded_value": str(self.solution.value),
            "fallback_used": self.fallback_used,
            "c_independent": True,
        }


def _best_member(inst: KnapsackInstance, gamma: int):
    best = None
    for T in enumerate_tuples(inst, gamma):
        sol = solve_lp(tuple_polytope(inst, T, gamma, cost=inst.c))
        if sol.status is not Status.OPTIMAL:
            continue
        if best is None or sol.value > best[1].value:
            best = (T, sol)
    if best is None:
        raise Infeasible("no tuple polytope is feasible")
    return best


def hull_value_by_decomposition(inst: KnapsackInstance | NormalizedInstance, gamma: int) -> Fraction:
    """Best tuple-polytope optimum, each polytope solved on its own."""
    inst = _plain(inst)
    return _best_member(inst, gamma)[1].value


def costfree_solve(
    inst: KnapsackInstance | NormalizedInstance,
    epsilon=None,
    gamma: Optional[int] = None,
    method: str = "hull",
) -> CostfreeResult:
    """Solve the cost-independent LP (``method="hull"``) or its per-tuple
    decomposition (``"decomposition"``), then repair the optimum.
    ``gamma`` defaults to ``ceil(k^2/epsilon)``.
    """
    inst = _plain(inst)
    if gamma is None:
        if epsilon is None:
            raise ValueError("either gamma or epsilon is required")
        gamma = gamma_for_costfree(inst.k, epsilon)
    if method == "decomposition":
        T, sol = _best_member(inst, gamma)
        y = sol.x
        z = repair(inst, T, y, gamma)
        count = sum(1 for _ in enumerate_tuples(inst, gamma))
        return CostfreeResult(sol.value, z, gamma, T, y, count)
    if method != "hull":
        raise ValueError(f"unknown method {method!r}")

    clp = build_costfree_lp(inst, gamma)
    sol = solve_lp(clp.lp, rule="dantzig")
    if sol.status is not Status.OPTIMAL:
        raise ContractViolation(f"cost-free hull LP is {sol.status.value}")
    lam = [sol.x[v] for v in clp.lam]
    ones = [t for t, v in enumerate(lam) if v == 1]
    fallback = not (len(ones) == 1 and sum(lam) == 1 and all(v >= 0 for v in lam))
    if fallback:
        log.warning("cost-free hull extreme point has fractional weights; using decomposition")
        T, msol = _best_member(inst, gamma)
        if msol.value != sol.value:
            raise ContractViolation("decomposition value differs from the hull value")
        y = msol.x
    else:
        T = clp.tuples[ones[0]]
        y = tuple(sol.x[v] for v in clp.yt_of[ones[0]])
    z = repair(inst, T, y, gamma)
    return CostfreeResult(
        sol.value, z, gamma, T, tuple(y), len(clp.tuples), clp.num_vars, clp.num_rows, fallback
    )


def check_membership(inst: KnapsackInstance | NormalizedInstance, gamma: int, point: Sequence) -> bool:
    """Whether ``point`` lies in the projection of the cost-free hull LP."""
    inst = _plain(inst)
    if len(point) != inst.n:
        raise ValueError("point has the wrong dimension")
    clp = build_costfree_lp(inst, gamma, cost=[0] * inst.n)
    if not clp.tuples:
        return False
    return fixed_point_feasible(clp.lp, clp.y, point)
