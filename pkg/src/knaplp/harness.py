"""Pipeline dispatch and integrality-gap reports behind the command line.

Reports hold exact rationals as strings.  Solution vectors are reported in
the instance's original item order.
"""

from __future__ import annotations

import csv
import io
import time
from fractions import Fraction
from typing import Optional, Sequence

from . import costfree, disjunctive, filtering, oracle, rounding
from .errors import BudgetExceeded, ContractViolation, Infeasible, UnboundedObjective
from .exactlp import Status, count_fractional
from .instance import (
    IntegralSolution,
    KnapsackInstance,
    cap_unbounded,
    format_rational,
    normalize,
)

METHODS = ("naive-lp", "ptas", "disjunctive", "costfree", "dp", "brute")


def _solution(inst: KnapsackInstance, x: Sequence[int]) -> dict:
    return IntegralSolution.of(inst, x).to_dict()


def _finite(inst: KnapsackInstance) -> KnapsackInstance:
    try:
        return cap_unbounded(inst)
    except Exception as exc:
        raise UnboundedObjective(str(exc)) from None


def resolve_gamma(method: str, k: int, gamma: Optional[int], epsilon) -> int:
    if gamma is not None:
        return gamma
    if epsilon is None:
        raise ValueError(f"method {method!r} needs --gamma or --epsilon")
    if method == "costfree":
        return costfree.gamma_for_costfree(k, epsilon)
    return filtering.gamma_for(k, epsilon)


def solve(
    inst: KnapsackInstance,
    method: str,
    gamma: Optional[int] = None,
    epsilon=None,
    workers: int = 1,
    trace: Optional[list] = None,
) -> dict:
    """Run one pipeline and return its report.

    Raises :class:`Infeasible`, :class:`UnboundedObjective`,
    :class:`BudgetExceeded` or :class:`ContractViolation`.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    out: dict = {"method": method, "instance": inst.digest(), "sense": inst.sense.value}

    if method in ("dp", "brute"):
        fn = oracle.dp_solve if method == "dp" else oracle.brute_force
        res = fn(inst)
        if res.status == "infeasible":
            raise Infeasible("no feasible integral solution")
        if res.status == "unbounded":
            raise UnboundedObjective("objective is unbounded")
        out.update(value=str(res.value), solution=_solution(inst, res.x), states=res.states)
        return out

    if method == "naive-lp":
        sol = rounding.solve_relaxation(inst)
        if sol.status is Status.INFEASIBLE:
            raise Infeasible("the relaxation is infeasible")
        if sol.status is Status.UNBOUNDED:
            raise UnboundedObjective("the relaxation is unbounded")
        _, rep = rounding.round_extreme(inst, sol)
        out.update(
            lp_value=str(sol.value),
            x=[format_rational(v) for v in sol.x],
            fractional=count_fractional(sol.x),
            rounding=rep.to_dict(),
            rounded_value=str(inst.value(rep.rounded)),
        )
        return out

    g = resolve_gamma(method, inst.k, gamma, epsilon)
    if method == "costfree":
        fin = _finite(inst)
        res = costfree.costfree_solve(fin, gamma=g)
        out.update(res.report())
        out["solution"] = res.solution.to_dict()
        return out

    if method == "ptas":
        work = inst if inst.packing else _finite(inst)
        norm = normalize(work)
        res = filtering.ptas_solve(norm, filtering.PtasConfig(gamma=g), workers=workers)
        if trace is not None:
            trace.extend(_original_trace(norm, res))
        out.update(
            gamma=g,
            num_guesses=len(res.trace),
            best_guess=list(norm.to_original(res.best.residual.guess.g)),
            rounded_value=str(res.solution.value),
            solution=_solution(inst, norm.to_original(res.solution.x)),
        )
        return out

    fin = _finite(inst)
    norm = normalize(fin)
    rep, result = disjunctive.solve_report(norm, g)
    rep["active_guess"] = list(norm.to_original(rep["active_guess"]))
    out.update(rep)
    out["solution"] = _solution(inst, norm.to_original(result.x))
    return out


def _original_trace(norm, res: filtering.PtasResult) -> list[dict]:
    lines = []
    for line in filtering.trace_lines(res):
        for key in ("g", "d_g", "rounded"):
            line[key] = list(norm.to_original(line[key]))
        if line["mu"] is not None:
            line["mu"] = norm.perm[line["mu"] - 1] + 1
        lines.append(line)
    return lines


def _gap(packing: bool, ip: Optional[Fraction], lp: Fraction) -> Optional[str]:
    """LP/IP for packing and IP/LP for covering (both at least 1)."""
    if ip is None:
        return None
    num, den = (lp, ip) if packing else (ip, lp)
    if den == 0:
        return "1" if num == 0 else None
    return str(num / den)


def gap_report(
    inst: KnapsackInstance,
    gammas: Sequence[int],
    include_costfree: bool = True,
    timings: bool = False,
) -> dict:
    """Oracle optimum, naive LP, hull LP per gamma (and the cost-free LP for packing),
    with the gap bound checked exactly wherever the oracle value is known."""
    fin = _finite(inst)
    norm = normalize(fin)
    packing = inst.packing
    report: dict = {"instance": inst.digest(), "sense": inst.sense.value, "k": inst.k, "n": inst.n}

    try:
        res = oracle.dp_solve(fin)
    except BudgetExceeded:
        try:
            res = oracle.brute_force(fin)
        except BudgetExceeded:
            res = None
    if res is not None and res.status == "infeasible":
        raise Infeasible("no feasible integral solution")
    opt = res.value if res is not None else None
    report["opt_ip"] = None if opt is None else str(opt)
    report["opt_ip_available"] = opt is not None

    naive = rounding.solve_relaxation(inst)
    if naive.status is Status.UNBOUNDED:
        raise UnboundedObjective("the relaxation is unbounded")
    report["naive_lp"] = str(naive.value)
    report["naive_gap"] = _gap(packing, opt, naive.value)

    rows = []
    all_ok = True
    for g in gammas:
        t0 = time.perf_counter()
        dlp, dsol = disjunctive.solve_disjunctive(norm, g)
        result = disjunctive.round_active(norm, g, dsol)
        entry: dict = {
            "gamma": g,
            "lp_value": str(dsol.value),
            "rounded_value": str(result.value),
            "gap": _gap(packing, opt, dsol.value),
            "fallback_used": dsol.fallback_used,
        }
        entry.update(disjunctive.size_report(dlp, inst.n, inst.k, g))
        factor = filtering.guarantee_factor(inst.k, g)
        if opt is None or factor is None:
            entry["gap_bound_holds"] = None
        else:
            bound = (1 - factor) * dsol.value if packing else (1 + factor) * dsol.value
            entry["gap_bound"] = str(bound)
            entry["gap_bound_holds"] = opt >= bound if packing else opt <= bound
            all_ok &= entry["gap_bound_holds"]
        if timings:
            entry["seconds"] = round(time.perf_counter() - t0, 4)
        if packing and include_costfree:
            t0 = time.perf_counter()
            cf = costfree.costfree_solve(fin, gamma=g)
            entry["costfree_lp_value"] = str(cf.value)
            entry["costfree_rounded_value"] = str(cf.solution.value)
            entry["costfree_tuples"] = cf.num_tuples
            entry["costfree_lp_vars"] = cf.lp_vars
            entry["costfree_lp_rows"] = cf.lp_rows
            entry["costfree_gap"] = _gap(packing, opt, cf.value)
            cf_factor = Fraction(inst.k**2, g) if g else None
            if opt is not None and cf_factor is not None:
                holds = opt >= (1 - cf_factor) * cf.value
                entry["costfree_gap_bound_holds"] = holds
                all_ok &= holds
            if timings:
                entry["costfree_seconds"] = round(time.perf_counter() - t0, 4)
        rows.append(entry)
    report["per_gamma"] = rows
    report["checks_skipped"] = opt is None
    report["all_checks_hold"] = all_ok
    return report


CSV_FIELDS = (
    "gamma", "lp_value", "rounded_value", "gap", "num_guesses", "lp_vars", "lp_rows",
    "gap_bound_holds", "costfree_lp_value", "costfree_rounded_value", "costfree_tuples",
)


def gap_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=("instance", "opt_ip", "naive_lp") + CSV_FIELDS,
                            extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in report["per_gamma"]:
        writer.writerow({"instance": report["instance"], "opt_ip": report["opt_ip"],
                         "naive_lp": report["naive_lp"], **row})
    return buf.getvalue()


def check_contract(report: dict) -> None:
    if not report.get("all_checks_hold", True):
        raise ContractViolation("a gap bound inequality failed; see the report")
