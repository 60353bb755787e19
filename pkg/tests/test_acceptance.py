"""Acceptance criteria, one PASS/FAIL line each.

All comparisons are exact rationals (tolerance 0).  Wall-clock limits are
pinned below.  Run standalone with ``python3 tests/test_acceptance.py``.
"""

import functools
import itertools
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import pytest

from knaplp import costfree, disjunctive, filtering, oracle
from knaplp.exactlp import count_fractional
from knaplp.instance import KnapsackInstance, Sense, normalize
from knaplp.rounding import round_extreme, solve_relaxation
from knaplp.suites import (
    GAMMAS,
    DisjunctiveStats,
    check_disjunctive,
    check_ptas,
    run_suite,
    suite_instances,
)
from vertex_oracle import knapsack_lp, lp_optimum, vertices

SEED = 1
RELAXATION_COUNT = 200
RELAXATION_SECONDS = 60
GUESSING_COUNT = 100
GUESSING_SECONDS = 300
COSTFREE_COUNT = 50
ORACLE_COUNT = 200


@dataclass
class Verdict:
    passed: bool
    detail: str


def _line(number: int, v: Verdict) -> str:
    return f"{'PASS' if v.passed else 'FAIL'} criterion {number}: {v.detail}"


# -- 1, 2: relaxation suites ----------------------------------------------


def criterion_1() -> Verdict:
    res = run_suite("lemma1", SEED, RELAXATION_COUNT)
    ok = res.passed and res.count == RELAXATION_COUNT and res.seconds < RELAXATION_SECONDS
    return Verdict(ok, f"extreme points have <= k fractional coordinates on "
                       f"{res.count - len(res.failures)}/{RELAXATION_COUNT} instances, "
                       f"{res.seconds:.1f}s (limit {RELAXATION_SECONDS}s, tolerance 0)")


def criterion_2() -> Verdict:
    res = run_suite("corollary2", SEED, RELAXATION_COUNT)
    return Verdict(res.passed, f"floor/ceiling loses <= k*c_max on "
                               f"{res.count - len(res.failures)}/{RELAXATION_COUNT} instances (exact)")


# -- 3 to 6: one pass over the guessing suites -----------------------------


@dataclass
class GuessingRun:
    instances: int = 0
    ptas_failures: list = field(default_factory=list)
    ptas_seconds: float = 0.0
    errors: list = field(default_factory=list)
    stats: DisjunctiveStats = field(default_factory=DisjunctiveStats)
    exact_instances: int = 0
    hull_seconds: float = 0.0


@functools.lru_cache(maxsize=None)
def guessing_run() -> GuessingRun:
    run = GuessingRun()
    for suite in ("ptas", "covering"):
        for inst in suite_instances(suite, SEED, GUESSING_COUNT):
            run.instances += 1
            t0 = time.perf_counter()
            try:
                problems = check_ptas(inst, GAMMAS)
            except Exception as exc:  # any crash is a violation
                problems = [repr(exc)]
            run.ptas_seconds += time.perf_counter() - t0
            if problems:
                run.ptas_failures.append((inst.dumps(), problems))
            before = run.stats.violations["exact"]
            t0 = time.perf_counter()
            try:
                check_disjunctive(inst, GAMMAS, run.stats)
            except Exception as exc:
                run.errors.append((inst.dumps(), repr(exc)))
            run.hull_seconds += time.perf_counter() - t0
            run.exact_instances += run.stats.violations["exact"] == before
    return run


def criterion_3() -> Verdict:
    run = guessing_run()
    ok = not run.ptas_failures and run.ptas_seconds < GUESSING_SECONDS
    return Verdict(ok, f"guess-and-round value within (1 -/+ k/gamma) of the exact optimum, "
                       f"gamma in {list(GAMMAS)}, {run.instances - len(run.ptas_failures)}/"
                       f"{run.instances} packing+covering instances, {run.ptas_seconds:.1f}s "
                       f"(limit {GUESSING_SECONDS}s, tolerance 0)")


def criterion_4() -> Verdict:
    run = guessing_run()
    ok = not run.errors and run.exact_instances == run.instances
    return Verdict(ok, f"hull LP value equals the best per-guess value on {run.exact_instances}/"
                       f"{run.instances} instances ({run.stats.solves} solves, "
                       f"{run.stats.fallbacks} value-equal fallbacks, {len(run.errors)} errors)")


def criterion_5() -> Verdict:
    run = guessing_run()
    bad = run.stats.violations["gap"]
    ok = not run.errors and bad == 0
    return Verdict(ok, f"exact optimum within (1 -/+ k/gamma) of the hull LP value: "
                       f"{bad} violations in {run.stats.solves} solves (exact)")


def criterion_6() -> Verdict:
    run = guessing_run()
    bad = run.stats.violations["size"]
    ok = not run.errors and bad == 0
    return Verdict(ok, f"hull LP has n + |G|(2n+1) variables and |G| <= (n+1)^gamma: "
                       f"{bad} violations in {run.stats.solves} solves "
                       f"(largest LP {run.stats.max_vars} variables)")


# -- 7, 8 ------------------------------------------------------------------


def criterion_7() -> Verdict:
    res = run_suite("costfree", SEED, COSTFREE_COUNT)
    return Verdict(res.passed, f"cost-free constraints identical over 3 cost vectors, repair keeps "
                               f">= (1 - k^2/gamma) of the LP value, integral points in the hull: "
                               f"{res.count - len(res.failures)}/{COSTFREE_COUNT} configurations (exact)")


def criterion_8() -> Verdict:
    res = run_suite("oracle-agreement", SEED, ORACLE_COUNT)
    return Verdict(res.passed, f"dynamic program equals brute force on "
                               f"{res.count - len(res.failures)}/{ORACLE_COUNT} instances (exact)")


# -- 9: worked example -----------------------------------------------------

# frozen after being recomputed by the independent oracles in ``_recompute``
FROZEN = {
    "packing_naive_lp": Fraction(5, 3),
    "packing_naive_rounded": Fraction(1),
    "packing_opt": Fraction(1),
    "packing_hull_1": Fraction(3, 2),
    "packing_hull_2": Fraction(1),
    "packing_rounded_1": Fraction(1),
    "packing_guesses_1": 3,
    "packing_vars_1": 17,
    "covering_naive_lp": Fraction(3, 2),
    "covering_opt": Fraction(2),
    "covering_hull_1": Fraction(3, 2),
    "covering_rounded_1": Fraction(2),
    "covering_guesses_1": 1,
    "costfree_lp_1": Fraction(3, 2),
    "costfree_repaired_1": Fraction(1),
}


def _running(sense: Sense) -> KnapsackInstance:
    return KnapsackInstance(sense, [[2, 3]], [4], [1, 1], [1, 1])


def _best(values, packing):
    return max(values) if packing else min(values)


def _definition_guesses(inst: KnapsackInstance, gamma: int):
    """(guess, residual instance) pairs straight from the definition."""
    out = []
    for g in itertools.product(*(range(d + 1) for d in inst.d)):
        if sum(g) > gamma:
            continue
        mu = next((i for i, v in enumerate(g) if v), None)
        if sum(g) < gamma or mu is None:
            d_g, b_g = [0] * inst.n, [0] * inst.k
        else:
            d_g = [inst.d[i] - g[i] if i <= mu else 0 for i in range(inst.n)]
            used = inst.row_activity(g)
            b_g = [b - u if inst.packing else max(0, b - u) for b, u in zip(inst.b, used)]
        if inst.packing and any(u > b for u, b in zip(inst.row_activity(g), inst.b)):
            continue
        top = [gi + di for gi, di in zip(g, d_g)]
        if not inst.packing and any(u < b for u, b in zip(inst.row_activity(top), inst.b)):
            continue
        out.append((g, KnapsackInstance(inst.sense, inst.A, b_g, inst.c, d_g)))
    return out


def _hull_by_vertices(inst: KnapsackInstance, gamma: int):
    pairs = _definition_guesses(inst, gamma)
    return _best([inst.value(g) + lp_optimum(knapsack_lp(r)) for g, r in pairs], inst.packing), len(pairs)


def _rounded_by_vertices(inst: KnapsackInstance, gamma: int):
    """Best rounded candidate over every optimal vertex of the best guess's residual LP."""
    cands = []
    best, _ = _hull_by_vertices(inst, gamma)
    for g, r in _definition_guesses(inst, gamma):
        p = knapsack_lp(r)
        opt = lp_optimum(p)
        if inst.value(g) + opt != best:
            continue
        for x in vertices(p):
            if r.value(x) == opt:
                step = math.floor if inst.packing else math.ceil
                cands.append(inst.value([gi + step(xi) for gi, xi in zip(g, x)]))
    return cands


def _brute(inst: KnapsackInstance):
    feas = [x for x in itertools.product(*(range(d + 1) for d in inst.d)) if inst.is_feasible(x)]
    return _best([inst.value(x) for x in feas], inst.packing)


def _costfree_by_vertices(inst: KnapsackInstance, gamma: int):
    """Max over hand-built tuple polytopes for k = 1, and the repaired value of its optimum."""
    best, best_y = None, None
    for g in itertools.product(*(range(d + 1) for d in inst.d)):
        if sum(g) > gamma or inst.row_activity(g)[0] > inst.b[0]:
            continue
        lo, hi = [0] * inst.n, list(inst.d)
        order = sorted(range(inst.n), key=lambda j: (inst.A[0][j], j))
        if sum(g) < gamma or not any(g):
            lo = hi = list(g)
        else:
            at = next(t for t, j in enumerate(order) if g[j])
            lo[order[at]] = g[order[at]]
            for j in order[at + 1:]:
                lo[j] = hi[j] = g[j]
        box = KnapsackInstance(Sense.PACKING, inst.A, inst.b, inst.c, hi)
        p = knapsack_lp(box)
        p.lower = [Fraction(v) for v in lo]
        for y in vertices(p):
            v = inst.value(y)
            if best is None or v > best:
                best, best_y = v, y
    yhat = [math.ceil(v) for v in best_y]
    repaired = yhat
    if not inst.is_feasible(yhat):
        options = []
        for j in range(inst.n):
            z = list(yhat)
            z[j] -= 1
            if z[j] >= 0 and inst.is_feasible(z):
                options.append((inst.c[j], j, z))
        repaired = min(options)[2]
    return best, inst.value(repaired)


def _recompute() -> dict:
    pack, cover = _running(Sense.PACKING), _running(Sense.COVERING)
    lp = lp_optimum(knapsack_lp(pack))
    x_star = next(x for x in vertices(knapsack_lp(pack)) if pack.value(x) == lp)
    out = {
        "packing_naive_lp": lp,
        "packing_naive_rounded": pack.value([math.floor(v) for v in x_star]),
        "packing_opt": _brute(pack),
        "covering_naive_lp": lp_optimum(knapsack_lp(cover)),
        "covering_opt": _brute(cover),
    }
    out["packing_hull_1"], out["packing_guesses_1"] = _hull_by_vertices(pack, 1)
    out["packing_hull_2"], _ = _hull_by_vertices(pack, 2)
    out["packing_vars_1"] = pack.n + out["packing_guesses_1"] * (2 * pack.n + 1)
    out["packing_rounded_1"] = max(_rounded_by_vertices(pack, 1))
    out["covering_hull_1"], out["covering_guesses_1"] = _hull_by_vertices(cover, 1)
    out["covering_rounded_1"] = min(_rounded_by_vertices(cover, 1))
    out["costfree_lp_1"], out["costfree_repaired_1"] = _costfree_by_vertices(pack, 1)
    return out


def _pipeline() -> dict:
    pack, cover = _running(Sense.PACKING), _running(Sense.COVERING)
    naive = solve_relaxation(pack)
    out = {
        "packing_naive_lp": naive.value,
        "packing_naive_rounded": round_extreme(pack, naive)[0].value,
        "packing_opt": oracle.brute_force(pack).value,
        "covering_naive_lp": solve_relaxation(cover).value,
        "covering_opt": oracle.dp_solve(cover).value,
    }
    dlp, dsol = disjunctive.solve_disjunctive(normalize(pack), 1)
    out["packing_hull_1"] = dsol.value
    out["packing_guesses_1"] = len(dlp.guesses)
    out["packing_vars_1"] = dlp.num_vars
    out["packing_rounded_1"] = disjunctive.round_active(normalize(pack), 1, dsol).value
    out["packing_hull_2"] = disjunctive.solve_disjunctive(normalize(pack), 2)[1].value
    cdlp, cdsol = disjunctive.solve_disjunctive(normalize(cover), 1)
    out["covering_hull_1"] = cdsol.value
    out["covering_guesses_1"] = len(cdlp.guesses)
    out["covering_rounded_1"] = disjunctive.round_active(normalize(cover), 1, cdsol).value
    cf = costfree.costfree_solve(pack, gamma=1)
    out["costfree_lp_1"], out["costfree_repaired_1"] = cf.value, cf.solution.value
    # the guessing scheme agrees with the frozen optima on both senses
    assert filtering.ptas_solve(pack, filtering.PtasConfig(gamma=1)).solution.value == 1
    assert filtering.ptas_solve(cover, filtering.PtasConfig(gamma=1)).solution.value == 2
    assert count_fractional(naive.x) == 1
    return out


def criterion_9() -> Verdict:
    oracle_values = _recompute()
    try:
        pipeline_values = _pipeline()
    except Exception as exc:
        return Verdict(False, f"worked example pipeline crashed: {exc!r}")
    bad = [key for key in FROZEN
           if not (FROZEN[key] == oracle_values[key] == pipeline_values[key])]
    return Verdict(not bad, f"worked example reproduces {len(FROZEN) - len(bad)}/{len(FROZEN)} "
                            f"frozen values in both senses (exact)"
                   + (f"; mismatched: {', '.join(bad)}" if bad else ""))


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    verdict = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + _line(number, verdict))
    assert verdict.passed, verdict.detail


def main() -> int:
    failed = 0
    for number in sorted(CRITERIA):
        verdict = CRITERIA[number]()
        failed += not verdict.passed
        print(_line(number, verdict), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
