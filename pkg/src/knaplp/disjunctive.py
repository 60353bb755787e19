"""One extended LP for the convex hull of all shifted residual polytopes.

Each guess ``g`` contributes the polytope ``{g + x : 0 <= x <= d^g,
Ax <= b^g}`` (``>=`` for covering).  The hull of their union is written with
one copy of the variables per guess, scaled by a weight ``lambda^g``:

    y = sum_g y^g,   sum_g lambda^g = 1,   lambda >= 0,
    y^g = x^g + lambda^g g,   0 <= x^g <= lambda^g d^g,   A x^g <= lambda^g b^g.

The objective is ``c . y`` and never touches the extended variables.  At an
extreme point exactly one ``lambda^g`` is 1; this is checked at runtime,
and when it fails the per-guess decomposition is used instead and flagged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ContractViolation, Infeasible
from .exactlp import LpProblem, LpSolution, Status, solve_lp
from .filtering import (
    Guess,
    ResidualProblem,
    _run,
    best_outcome,
    enumerate_guesses,
    guarantee_factor,
    residual,
)
from .instance import INF, IntegralSolution, KnapsackInstance, NormalizedInstance, as_normalized
from .rounding import round_extreme, solve_relaxation

log = logging.getLogger(__name__)


@dataclass
class DisjunctiveLp:
    guesses: list[Guess]
    residuals: list[ResidualProblem]
    lp: LpProblem
    y: list[int]
    x_of: list[list[int]] = field(default_factory=list)
    yg_of: list[list[int]] = field(default_factory=list)
    lam: list[int] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return self.lp.num_vars

    @property
    def num_rows(self) -> int:
        return self.lp.num_rows


def _require_bounded(base: KnapsackInstance) -> None:
    if not base.bounded:
        raise ContractViolation("finite d required; apply cap_unbounded first")


def build_disjunctive(
    inst: NormalizedInstance | KnapsackInstance, gamma: int, objective: bool = True
) -> DisjunctiveLp:
    """Lay out the hull LP: ``y`` first, then ``x^g``, ``y^g``, ``lambda^g`` per guess."""
    inst = as_normalized(inst)
    base = inst.base
    _require_bounded(base)
    guesses = list(enumerate_guesses(inst, gamma))
    if not guesses:
        raise Infeasible("no admissible guess: the covering instance is infeasible")
    n = base.n
    p = LpProblem(maximize=base.packing)
    y = [p.add_var(f"y{i + 1}", base.c[i] if objective else 0) for i in range(n)]
    out = DisjunctiveLp(guesses, [], p, y)
    for t, guess in enumerate(guesses):
        out.x_of.append([p.add_var(f"x{i + 1}_g{t}") for i in range(n)])
        out.yg_of.append([p.add_var(f"y{i + 1}_g{t}") for i in range(n)])
        out.lam.append(p.add_var(f"lam_g{t}"))

    for i in range(n):
        coeffs = [(y[i], 1)] + [(yg[i], -1) for yg in out.yg_of]
        p.add_row(coeffs, "=", 0)
    p.add_row([(lam, 1) for lam in out.lam], "=", 1)

    rel = "<=" if base.packing else ">="
    for t, guess in enumerate(guesses):
        res = residual(inst, guess, gamma)
        out.residuals.append(res)
        xs, ys, lam = out.x_of[t], out.yg_of[t], out.lam[t]
        for i in range(n):
            p.add_row([(ys[i], 1), (xs[i], -1), (lam, -guess.g[i])], "=", 0)
        for i in range(n):
            p.add_row([(xs[i], 1), (lam, -res.d_g[i])], "<=", 0)
        for row, bj in zip(base.A, res.b_g):
            p.add_row([(xs[i], a) for i, a in enumerate(row)] + [(lam, -bj)], rel, 0)
    return out


@dataclass(frozen=True)
class DisjunctiveSolution:
    value: Fraction
    y: tuple[Fraction, ...]
    active_guess: tuple[int, ...]
    x_active: tuple[Fraction, ...]
    lam: tuple[Fraction, ...]
    fallback_used: bool = False


def _decompose(inst: NormalizedInstance, gamma: int) -> tuple[ResidualProblem, LpSolution]:
    """Best guess by ``c.g + residual LP optimum``; ties to the smallest guess."""
    outcomes = _run(inst, gamma, _guess_value, 1)
    if not outcomes:
        raise Infeasible("no admissible guess: the covering instance is infeasible")
    best = best_outcome(outcomes, inst.base.packing, key=lambda o: o.lp_value)
    return best.residual, best.sol


@dataclass(frozen=True)
class _GuessValue:
    residual: ResidualProblem
    sol: LpSolution
    lp_value: Fraction


def _guess_value(inst: NormalizedInstance, gamma: int, guess: Guess) -> _GuessValue:
    res = residual(inst, guess, gamma)
    sol = solve_relaxation(res.instance(inst))
    if not sol.optimal:
        raise ContractViolation(f"residual LP for {guess.g} is {sol.status.value}")
    return _GuessValue(res, sol, inst.base.value(guess.g) + sol.value)


def value_by_decomposition(
    inst: NormalizedInstance | KnapsackInstance, gamma: int, workers: int = 1
) -> Fraction:
    """Best over guesses of ``c.g`` plus the residual LP optimum, each solved on its own."""
    inst = as_normalized(inst)
    _require_bounded(inst.base)
    outcomes = _run(inst, gamma, _guess_value, workers)
    if not outcomes:
        raise Infeasible("no admissible guess: the covering instance is infeasible")
    return best_outcome(outcomes, inst.base.packing, key=lambda o: o.lp_value).lp_value


def solve_disjunctive(
    inst: NormalizedInstance | KnapsackInstance, gamma: int, rule: str = "dantzig"
) -> tuple[DisjunctiveLp, DisjunctiveSolution]:
    """Solve the hull LP and split its extreme point into guess and residual point."""
    inst = as_normalized(inst)
    dlp = build_disjunctive(inst, gamma)
    sol = solve_lp(dlp.lp, rule=rule)
    if sol.status is not Status.OPTIMAL:
        raise ContractViolation(f"hull LP is {sol.status.value}")
    lam = tuple(sol.x[v] for v in dlp.lam)
    y = tuple(sol.x[v] for v in dlp.y)
    ones = [t for t, v in enumerate(lam) if v == 1]
    if len(ones) == 1 and all(v == 0 for t, v in enumerate(lam) if t != ones[0]):
        t = ones[0]
        x_active = tuple(sol.x[v] for v in dlp.x_of[t])
        return dlp, DisjunctiveSolution(sol.value, y, dlp.guesses[t].g, x_active, lam)

    log.warning("hull LP extreme point has fractional weights %s; using decomposition", lam)
    res, rsol = _decompose(inst, gamma)
    g = res.guess.g
    y_alt = tuple(gi + xi for gi, xi in zip(g, rsol.x))
    value = inst.base.value(y_alt)
    if value != sol.value:
        raise ContractViolation(f"decomposition value {value} differs from hull value {sol.value}")
    return dlp, DisjunctiveSolution(value, y_alt, g, rsol.x, lam, fallback_used=True)


def round_active(
    inst: NormalizedInstance, gamma: int, dsol: DisjunctiveSolution
) -> IntegralSolution:
    """Round the active residual point (floor / ceiling) and add the guess back.

    Packing guarantees ``c.result >= (1 - k/gamma) c.y``, covering
    ``c.result <= (1 + k/gamma) c.y``; both are asserted exactly.
    """
    base = inst.base
    g = dsol.active_guess
    if sum(g) < gamma or not any(g):
        if any(dsol.x_active):
            raise ContractViolation("a whole-solution guess carries a residual part")
        result = IntegralSolution.of(base, g)
    else:
        rinst = residual(inst, g, gamma).instance(inst)
        rounded, _ = round_extreme(rinst, dsol.x_active)
        result = IntegralSolution.of(base, [gi + xi for gi, xi in zip(g, rounded.x)])
    if not base.is_feasible(result.x):
        raise ContractViolation("rounded hull solution is infeasible")
    factor = guarantee_factor(base.k, gamma)
    if factor is not None:
        if base.packing and result.value < (1 - factor) * dsol.value:
            raise ContractViolation("packing rounding guarantee violated")
        if not base.packing and result.value > (1 + factor) * dsol.value:
            raise ContractViolation("covering rounding guarantee violated")
    return result


def solve_and_round(
    inst: NormalizedInstance | KnapsackInstance, gamma: int, rule: str = "dantzig"
) -> tuple[DisjunctiveSolution, IntegralSolution]:
    inst = as_normalized(inst)
    _, dsol = solve_disjunctive(inst, gamma, rule=rule)
    return dsol, round_active(inst, gamma, dsol)


def check_membership(
    inst: NormalizedInstance | KnapsackInstance, gamma: int, point: Sequence
) -> bool:
    """Whether ``point`` lies in the projection of the hull LP onto ``y``."""
    inst = as_normalized(inst)
    if len(point) != inst.n:
        raise ValueError("point has the wrong dimension")
    try:
        dlp = build_disjunctive(inst, gamma, objective=False)
    except Infeasible:
        return False
    return fixed_point_feasible(dlp.lp, dlp.y, point)


def fixed_point_feasible(p: LpProblem, coords: Sequence[int], point: Sequence) -> bool:
    """Feasibility of ``p`` with the variables ``coords`` pinned to ``point``."""
    lower = list(p.lower)
    upper = list(p.upper)
    for v, val in zip(coords, point):
        val = Fraction(val)
        if val < lower[v] or (upper[v] is not INF and val > upper[v]):
            return False
        lower[v] = upper[v] = val
    fixed = LpProblem(p.maximize, [Fraction(0)] * p.num_vars, lower, upper, p.rows, p.names)
    return solve_lp(fixed).status is Status.OPTIMAL


def size_report(dlp: DisjunctiveLp, n: int, k: int, gamma: int) -> dict:
    g = len(dlp.guesses)
    return {
        "num_guesses": g,
        "guess_bound": (n + 1) ** gamma,
        "lp_vars": dlp.num_vars,
        "layout_vars": n + g * (2 * n + 1),
        "lp_rows": dlp.num_rows,
        "layout_rows": n + 1 + g * (2 * n + k),
    }


def report(dlp: DisjunctiveLp, dsol: DisjunctiveSolution, result: IntegralSolution, gamma: int) -> dict:
    return {
        "gamma": gamma,
        "num_guesses": len(dlp.guesses),
        "lp_vars": dlp.num_vars,
        "lp_rows": dlp.num_rows,
        "lp_value": str(dsol.value),
        "active_guess": list(dsol.active_guess),
        "rounded_value": str(result.value),
        "fallback_used": dsol.fallback_used,
    }


def solve_report(inst: NormalizedInstance | KnapsackInstance, gamma: int) -> tuple[dict, IntegralSolution]:
    inst = as_normalized(inst)
    dlp, dsol = solve_disjunctive(inst, gamma)
    result = round_active(inst, gamma, dsol)
    return report(dlp, dsol, result, gamma), result

