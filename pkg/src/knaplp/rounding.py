"""The naive relaxation of an instance and rounding of its extreme points.

Floor for packing, ceiling for covering.  Because an extreme point has at
most ``k`` fractional coordinates, either rounding moves the objective by
at most ``k * c_max``; both functions check their inputs and assert that
bound exactly instead of trusting callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import ContractViolation
from .exactlp import LpProblem, LpSolution, count_fractional, solve_lp
from .instance import INF, IntegralSolution, KnapsackInstance, NormalizedInstance, format_rational

AnyInstance = Union[KnapsackInstance, NormalizedInstance]


def _base(inst: AnyInstance) -> KnapsackInstance:
    return inst.base if isinstance(inst, NormalizedInstance) else inst


def naive_lp(inst: AnyInstance) -> LpProblem:
    """``max/min c.x`` subject to ``0 <= x <= d`` and ``Ax <= b`` (``>=`` for covering)."""
    inst = _base(inst)
    p = LpProblem(maximize=inst.packing)
    for i in range(inst.n):
        p.add_var(f"x{i + 1}", inst.c[i], 0, inst.d[i])
    rel = "<=" if inst.packing else ">="
    for row, bj in zip(inst.A, inst.b):
        p.add_row(enumerate(row), rel, bj)
    return p


def solve_relaxation(inst: AnyInstance, rule: str = "bland") -> LpSolution:
    return solve_lp(naive_lp(inst), rule=rule)


def c_max(inst: AnyInstance) -> Fraction:
    """Largest cost among items the problem allows at all (``d_i > 0``)."""
    inst = _base(inst)
    return max((ci for ci, di in zip(inst.c, inst.d) if di is INF or di > 0), default=Fraction(0))


def round_down(x: Sequence) -> tuple[int, ...]:
    return tuple(math.floor(Fraction(v)) for v in x)


def round_up(x: Sequence) -> tuple[int, ...]:
    return tuple(math.ceil(Fraction(v)) for v in x)


@dataclass(frozen=True)
class RoundingReport:
    fractional: tuple[Fraction, ...]
    rounded: tuple[int, ...]
    loss: Fraction
    c_max: Fraction
    bound: Fraction

    def to_dict(self) -> dict:
        return {
            "fractional": [format_rational(v) for v in self.fractional],
            "rounded": list(self.rounded),
            "loss": str(self.loss),
            "c_max": str(self.c_max),
            "bound": str(self.bound),
        }


def _point(sol: LpSolution | Sequence, n: int) -> tuple[Fraction, ...]:
    if isinstance(sol, LpSolution):
        if not sol.optimal:
            raise ContractViolation(f"expected an optimal LP solution, got {sol.status.value}")
        x = sol.x[:n]
    else:
        x = sol
    return tuple(Fraction(v) for v in x)


def _round(inst: AnyInstance, sol, packing: bool) -> tuple[IntegralSolution, RoundingReport]:
    base = _base(inst)
    if base.packing != packing:
        raise ContractViolation(f"instance sense is {base.sense.value}")
    x = _point(sol, base.n)
    if len(x) != base.n or not base.is_feasible(x):
        raise ContractViolation("point is not feasible for the relaxation")
    if count_fractional(x) > base.k:
        raise ContractViolation(
            f"{count_fractional(x)} fractional coordinates; an extreme point has at most {base.k}"
        )
    rounded = round_down(x) if packing else round_up(x)
    if not base.is_feasible(rounded):
        raise ContractViolation("rounded point is infeasible")
    out = IntegralSolution.of(base, rounded)
    lp_value = base.value(x)
    cm = c_max(base)
    bound = base.k * cm
    loss = abs(lp_value - out.value)
    if loss > bound:
        raise ContractViolation(f"rounding lost {loss} > k*c_max = {bound}")
    return out, RoundingReport(x, rounded, loss, cm, bound)


def round_extreme_packing(inst: AnyInstance, sol: LpSolution | Sequence):
    """Floor an extreme point of the packing relaxation; value drops by at most ``k*c_max``."""
    return _round(inst, sol, packing=True)


def round_extreme_covering(inst: AnyInstance, sol: LpSolution | Sequence):
    """Ceil an extreme point of the covering relaxation; value grows by at most ``k*c_max``."""
    return _round(inst, sol, packing=False)


def round_extreme(inst: AnyInstance, sol: LpSolution | Sequence):
    return _round(inst, sol, packing=_base(inst).packing)
