"""Exact ground truth: exhaustive enumeration and the pseudo-polynomial DP."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import BudgetExceeded
from .instance import InstanceError, KnapsackInstance, cap_unbounded

DEFAULT_BUDGET = 10**7
BUDGET_ENV = "KNAPLP_ORACLE_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass(frozen=True)
class OracleResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Optional[Fraction] = None
    x: Optional[tuple[int, ...]] = None
    states: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _finite(inst: KnapsackInstance) -> KnapsackInstance | None:
    try:
        return cap_unbounded(inst)
    except InstanceError:
        return None


def brute_force(inst: KnapsackInstance, budget: int | None = None) -> OracleResult:
    """Enumerate every integer point of the box ``0 <= x <= d``.

    Among optimal points the lexicographically smallest ``x`` is returned.
    Infinite bounds are capped first (which keeps the optimum).
    """
    budget = default_budget() if budget is None else budget
    fin = _finite(inst)
    if fin is None:
        return OracleResult("unbounded")
    size = math.prod(di + 1 for di in fin.d)
    if size > budget:
        raise BudgetExceeded(f"too large for brute force: {size} points > budget {budget}")

    cols = [tuple(row[i] for row in fin.A) for i in range(fin.n)]
    k = fin.k
    packing = fin.packing
    best_x = None
    best_v = None
    for x in itertools.product(*(range(di + 1) for di in fin.d)):
        act = [0] * k
        for i, xi in enumerate(x):
            if xi:
                col = cols[i]
                for j in range(k):
                    act[j] += col[j] * xi
        if packing:
            if any(a > bj for a, bj in zip(act, fin.b)):
                continue
        elif any(a < bj for a, bj in zip(act, fin.b)):
            continue
        v = fin.value(x)
        if best_v is None or (v > best_v if packing else v < best_v):
            best_v, best_x = v, x
    if best_x is None:
        return OracleResult("infeasible", states=size)
    return OracleResult("optimal", best_v, tuple(best_x), size)


def dp_solve(inst: KnapsackInstance, budget: int | None = None) -> OracleResult:
    """Dynamic program over usage vectors ``u`` with ``0 <= u <= b``.

    Packing keeps the best value per exact usage vector.  Covering keeps the
    cheapest cost per usage vector clamped at ``b``, since coverage beyond
    the demand is worth nothing.
    """
    budget = default_budget() if budget is None else budget
    fin = _finite(inst)
    if fin is None:
        return OracleResult("unbounded")
    size = math.prod(bj + 1 for bj in fin.b)
    if size > budget:
        raise BudgetExceeded(f"too large for the DP: {size} states > budget {budget}")

    b = fin.b
    packing = fin.packing
    better = (lambda new, old: new > old) if packing else (lambda new, old: new < old)
    start = tuple(0 for _ in b)
    # layer: usage -> (value, counts chosen so far)
    layer: dict[tuple[int, ...], tuple[Fraction, tuple[int, ...]]] = {start: (Fraction(0), ())}
    visited = 0
    for i in range(fin.n):
        col = [row[i] for row in fin.A]
        ci = fin.c[i]
        nxt: dict[tuple[int, ...], tuple[Fraction, tuple[int, ...]]] = {}
        for u, (v, xs) in layer.items():
            for t in range(fin.d[i] + 1):
                if packing:
                    w = tuple(uj + a * t for uj, a in zip(u, col))
                    if any(wj > bj for wj, bj in zip(w, b)):
                        break
                else:
                    w = tuple(min(bj, uj + a * t) for uj, a, bj in zip(u, col, b))
                nv = v + ci * t
                cur = nxt.get(w)
                if cur is None or better(nv, cur[0]):
                    nxt[w] = (nv, xs + (t,))
                visited += 1
        layer = nxt
    if packing:
        value, x = max(layer.values(), key=lambda e: e[0])
    else:
        target = tuple(b)
        if target not in layer:
            return OracleResult("infeasible", states=visited)
        value, x = layer[target]
    return OracleResult("optimal", value, x, visited)
