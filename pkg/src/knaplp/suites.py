"""Randomized property suites with counterexample shrinking.

A suite draws instances from a seeded generator and runs a check that
returns the list of violated properties (empty means pass).  Every
comparison is exact.  A failing instance is shrunk greedily (drop items or
rows, lower entries) while it keeps failing.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import costfree, disjunctive, filtering, oracle, rounding
from .errors import BudgetExceeded, ContractViolation, Infeasible
from .exactlp import check_point, count_fractional, verify_optimal
from .instance import (
    INF,
    GenParams,
    InstanceError,
    KnapsackInstance,
    Sense,
    cap_unbounded,
    generate_random,
    normalize,
)

GAMMAS = (1, 2, 3, 4)


def _rng(suite: str, seed: int, index: int) -> random.Random:
    return random.Random(f"{suite}:{seed}:{index}")


def gen_relaxation(rng: random.Random) -> KnapsackInstance:
    """k in 1..3, n in 1..12, entries in 0..9, mixed senses, some unbounded items."""
    k, n = rng.randint(1, 3), rng.randint(1, 12)
    sense = rng.choice([Sense.PACKING, Sense.COVERING])
    A = [[rng.randint(0, 9) for _ in range(n)] for _ in range(k)]
    c = [rng.randint(0, 9) for _ in range(n)]
    d = []
    for i in range(n):
        column_used = any(row[i] for row in A)
        d.append(INF if column_used and rng.random() < 0.15 else rng.randint(0, 9))
    b = []
    for row in A:
        if sense is Sense.PACKING:
            b.append(rng.randint(0, 9 * n))
        else:
            reach = sum(9 * n if di is INF else a * di for a, di in zip(row, d) if a)
            b.append(rng.randint(0, min(reach, 9 * n)))
    return KnapsackInstance(sense, A, b, c, d)


def gen_small(rng: random.Random, sense: Sense) -> KnapsackInstance:
    """n in 1..8, d in 1..3, weights in 1..9, rows a quarter to a third full."""
    params = GenParams(
        k=rng.randint(1, 3),
        n=rng.randint(1, 8),
        weight_range=(1, 9),
        cost_range=(0, 9),
        bound_range=(1, 3),
        sense=sense,
        tightness=rng.choice([Fraction(1, 4), Fraction(1, 3)]),
    )
    return generate_random(params, rng.randrange(2**32))


def gen_oracle(rng: random.Random) -> KnapsackInstance:
    params = GenParams(
        k=rng.randint(1, 3),
        n=rng.randint(1, 8),
        weight_range=(0, 9),
        cost_range=(0, 9),
        bound_range=(0, 3),
        sense=rng.choice([Sense.PACKING, Sense.COVERING]),
        tightness=Fraction(rng.randint(1, 4), 4),
        min_rhs=0,
    )
    return generate_random(params, rng.randrange(2**32))


def gen_costfree(rng: random.Random) -> KnapsackInstance:
    """Small packing configurations for the cost-independent LP."""
    params = GenParams(
        k=rng.randint(1, 2),
        n=rng.randint(1, 4),
        weight_range=(1, 9),
        cost_range=(0, 9),
        bound_range=(1, 2),
        tightness=rng.choice([Fraction(1, 4), Fraction(1, 2)]),
    )
    return generate_random(params, rng.randrange(2**32))


# -- checks ---------------------------------------------------------------


def check_fractional_count(inst: KnapsackInstance) -> list[str]:
    sol = rounding.solve_relaxation(inst)
    if not sol.optimal:
        if inst.packing and sol.status.value == "unbounded":
            return []
        if not inst.packing and sol.status.value == "infeasible":
            return []
        return [f"unexpected LP status {sol.status.value}"]
    out = []
    frac = count_fractional(sol.x)
    if frac > inst.k:
        out.append(f"{frac} fractional coordinates > k={inst.k}")
    if sol.value != inst.value(sol.x):
        out.append("objective value differs from c.x")
    if not verify_optimal(rounding.naive_lp(inst), sol):
        out.append("duality certificate rejected the optimum")
    return out


def check_rounding_loss(inst: KnapsackInstance) -> list[str]:
    sol = rounding.solve_relaxation(inst)
    if not sol.optimal:
        return []
    x = sol.x
    lp_value = inst.value(x)
    bound = inst.k * rounding.c_max(inst)
    if inst.packing:
        z = rounding.round_down(x)
        ok = inst.value(z) >= lp_value - bound
    else:
        z = rounding.round_up(x)
        ok = inst.value(z) <= lp_value + bound
    out = []
    if not ok:
        out.append(f"rounding moved the value by more than k*c_max={bound}")
    if not inst.is_feasible(z):
        out.append("rounded point is infeasible")
    return out


def _opt(inst: KnapsackInstance):
    res = oracle.dp_solve(inst)
    if not res.optimal:
        return None
    return res.value


def _ratio_ok(packing: bool, approx: Fraction, reference: Fraction, gamma: int, k: int) -> bool:
    f = Fraction(k, gamma)
    return approx >= (1 - f) * reference if packing else approx <= (1 + f) * reference


def check_ptas(inst: KnapsackInstance, gammas=GAMMAS) -> list[str]:
    out = []
    fin = cap_unbounded(inst)
    opt = _opt(fin)
    if opt is None:
        return []
    norm = normalize(fin)
    for gamma in gammas:
        try:
            res = filtering.ptas_solve(norm, filtering.PtasConfig(gamma=gamma))
        except Infeasible:
            out.append(f"gamma={gamma}: reported infeasible on a feasible instance")
            continue
        if not fin.is_feasible(norm.to_original(res.solution.x)):
            out.append(f"gamma={gamma}: infeasible output")
        if not _ratio_ok(fin.packing, res.solution.value, opt, gamma, fin.k):
            out.append(f"gamma={gamma}: value {res.solution.value} vs OPT {opt}")
    return out


@dataclass
class DisjunctiveStats:
    fallbacks: int = 0
    solves: int = 0
    max_vars: int = 0
    violations: Counter = field(default_factory=Counter)


def check_disjunctive(inst: KnapsackInstance, gammas=GAMMAS, stats: Optional[DisjunctiveStats] = None):
    """Hull value equals the decomposition, weights are 0/1, the layout count holds,
    and the brute-force optimum is within the gap bound of the hull value."""
    out = []
    fin = cap_unbounded(inst)
    norm = normalize(fin)
    opt = _opt(fin)
    if opt is None:
        return []
    naive = rounding.solve_relaxation(fin).value

    def flag(kind: str, msg: str) -> None:
        out.append(msg)
        if stats is not None:
            stats.violations[kind] += 1

    for gamma in gammas:
        dlp, dsol = disjunctive.solve_disjunctive(norm, gamma)
        result = disjunctive.round_active(norm, gamma, dsol)
        if stats is not None:
            stats.solves += 1
            stats.fallbacks += dsol.fallback_used
            stats.max_vars = max(stats.max_vars, dlp.num_vars)
        if dsol.fallback_used:
            flag("lambda", f"gamma={gamma}: fractional lambda at the hull optimum")
        decomp = disjunctive.value_by_decomposition(norm, gamma)
        if decomp != dsol.value:
            flag("exact", f"gamma={gamma}: hull {dsol.value} != decomposition {decomp}")
        n, g = fin.n, len(dlp.guesses)
        if dlp.num_vars != n + g * (2 * n + 1) or g > (n + 1) ** gamma:
            flag("size", f"gamma={gamma}: size {dlp.num_vars} vars for {g} guesses")
        if not _ratio_ok(fin.packing, opt, dsol.value, gamma, fin.k):
            flag("gap", f"gamma={gamma}: OPT {opt} vs hull {dsol.value}")
        if fin.packing and dsol.value > naive or not fin.packing and dsol.value < naive:
            flag("exact", f"gamma={gamma}: hull value {dsol.value} outside the naive bound {naive}")
        if (result.value > opt) if fin.packing else (result.value < opt):
            flag("gap", f"gamma={gamma}: rounded value beats the optimum")
    return out


def check_oracles(inst: KnapsackInstance) -> list[str]:
    bf = oracle.brute_force(inst)
    dp = oracle.dp_solve(inst)
    if bf.status != dp.status:
        return [f"status {bf.status} vs {dp.status}"]
    if not bf.optimal:
        return []
    out = []
    if bf.value != dp.value:
        out.append(f"brute {bf.value} != dp {dp.value}")
    fin = cap_unbounded(inst)
    for name, res in (("brute", bf), ("dp", dp)):
        if not fin.is_feasible(res.x) or fin.value(res.x) != res.value:
            out.append(f"{name} solution does not attain its value")
    lp = rounding.solve_relaxation(inst).value
    if (bf.value > lp) if inst.packing else (bf.value < lp):
        out.append(f"optimum {bf.value} beats the LP bound {lp}")
    return out


def costfree_costs(rng: random.Random, n: int, count: int = 3) -> list[list[int]]:
    return [[rng.randint(0, 9) for _ in range(n)] for _ in range(count)]


def check_costfree(inst: KnapsackInstance, gamma: Optional[int] = None, costs=None) -> list[str]:
    """Constraint text identical across costs, repair guarantee under both deletion
    readings, hull value equals the best tuple polytope, and integral points lift."""
    rng = random.Random(inst.digest())
    gamma = gamma if gamma is not None else rng.randint(1, 3)
    costs = costs if costs is not None else costfree_costs(rng, inst.n)
    out = []
    texts = set()
    for c in costs:
        ci = inst.with_costs(c)
        texts.add(costfree.build_costfree_lp(ci, gamma).constraint_text())
        res = costfree.costfree_solve(ci, gamma=gamma)
        if res.fallback_used:
            out.append(f"c={c}: fractional lambda at the cost-free hull optimum")
        if res.value != costfree.hull_value_by_decomposition(ci, gamma):
            out.append(f"c={c}: hull value differs from the best tuple polytope")
        floor = (1 - Fraction(inst.k**2, gamma)) * res.value
        if res.solution.value < floor:
            out.append(f"c={c}: repaired {res.solution.value} < {floor}")
        exact = costfree.repair(ci, res.active, res.y, gamma, exact_k=True)
        if exact.value < floor:
            out.append(f"c={c}: exactly-k repair {exact.value} < {floor}")
        opt = oracle.brute_force(ci).value
        if res.solution.value > opt or opt > res.value:
            out.append(f"c={c}: order OPT {opt}, LP {res.value}, repaired {res.solution.value} broken")
    if len(texts) != 1:
        out.append("constraint system depends on the costs")
    for x in _integral_points(inst):
        if not costfree.check_membership(inst, gamma, x):
            out.append(f"integral point {x} is outside the hull projection")
            break
        T = costfree.true_tuple(inst, x, gamma)
        if check_point(costfree.tuple_polytope(inst, T, gamma), x) is not None:
            out.append(f"integral point {x} is outside its own tuple polytope")
            break
    return out


def _integral_points(inst: KnapsackInstance):
    for x in itertools.product(*(range(di + 1) for di in inst.d)):
        if inst.is_feasible(x):
            yield x


# -- driver ---------------------------------------------------------------


@dataclass(frozen=True)
class Suite:
    name: str
    generate: Callable[[random.Random], KnapsackInstance]
    check: Callable[[KnapsackInstance], list[str]]


SUITES: dict[str, Suite] = {
    "lemma1": Suite("lemma1", gen_relaxation, check_fractional_count),
    "corollary2": Suite("corollary2", gen_relaxation, check_rounding_loss),
    "ptas": Suite("ptas", lambda r: gen_small(r, Sense.PACKING), check_ptas),
    "disjunctive-equality": Suite(
        "disjunctive-equality", lambda r: gen_small(r, Sense.PACKING), check_disjunctive
    ),
    "covering": Suite(
        "covering",
        lambda r: gen_small(r, Sense.COVERING),
        lambda inst: check_ptas(inst) + check_disjunctive(inst),
    ),
    "costfree": Suite("costfree", gen_costfree, check_costfree),
    "oracle-agreement": Suite("oracle-agreement", gen_oracle, check_oracles),
}


def suite_instances(name: str, seed: int, count: int) -> list[KnapsackInstance]:
    """The instances ``run_suite(name, seed, count)`` draws, in order."""
    gen = SUITES[name].generate
    return [gen(_rng(name, seed, i)) for i in range(count)]


def safe_check(check, inst: KnapsackInstance) -> list[str]:
    try:
        return check(inst)
    except BudgetExceeded:
        return []
    except (ContractViolation, Infeasible, InstanceError, ZeroDivisionError) as exc:
        return [f"{type(exc).__name__}: {exc}"]


def _shrink_candidates(inst: KnapsackInstance):
    n, k = inst.n, inst.k
    keep = lambda seq, drop: [v for t, v in enumerate(seq) if t != drop]
    for i in range(n):
        if n > 1:
            yield KnapsackInstance(
                inst.sense, [keep(r, i) for r in inst.A], inst.b, keep(inst.c, i), keep(inst.d, i)
            )
    for j in range(k):
        if k > 1:
            yield KnapsackInstance(inst.sense, keep(inst.A, j), keep(inst.b, j), inst.c, inst.d, _n=n)
    for j in range(k):
        for i in range(n):
            if inst.A[j][i] > 0:
                A = [list(r) for r in inst.A]
                A[j][i] -= 1
                yield KnapsackInstance(inst.sense, A, inst.b, inst.c, inst.d, _n=n)
        if inst.b[j] > 0:
            b = list(inst.b)
            b[j] -= 1
            yield inst.with_rhs(b)
    for i in range(n):
        if inst.d[i] is not INF and inst.d[i] > 0:
            d = list(inst.d)
            d[i] -= 1
            yield inst.with_bounds(d)
        if inst.c[i] > 0:
            c = list(inst.c)
            c[i] = max(Fraction(0), c[i] - 1)
            yield inst.with_costs(c)


def shrink(inst: KnapsackInstance, check, max_steps: int = 500) -> KnapsackInstance:
    """Greedy minimisation: keep any simpler instance that still fails ``check``."""
    steps = 0
    improved = True
    while improved and steps < max_steps:
        improved = False
        for cand in _shrink_candidates(inst):
            steps += 1
            if safe_check(check, cand):
                inst = cand
                improved = True
                break
            if steps >= max_steps:
                break
    return inst


@dataclass
class SuiteResult:
    name: str
    count: int
    failures: list[tuple[int, KnapsackInstance, list[str]]] = field(default_factory=list)
    seconds: float = 0.0
    counterexample: Optional[Path] = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.name}: {self.count - len(self.failures)}/{self.count} instances "
                f"({self.seconds:.1f}s)")


def run_suite(
    name: str,
    seed: int = 0,
    count: int = 100,
    dump_dir: Optional[Path] = None,
    stop_after: int = 1,
) -> SuiteResult:
    """Run ``count`` instances of suite ``name``; shrink and dump the first failure."""
    suite = SUITES[name]
    res = SuiteResult(name, count)
    start = time.perf_counter()
    for i, inst in enumerate(suite_instances(name, seed, count)):
        problems = safe_check(suite.check, inst)
        if problems:
            res.failures.append((i, inst, problems))
            if len(res.failures) >= stop_after:
                res.count = i + 1
                break
    res.seconds = time.perf_counter() - start
    if res.failures and dump_dir is not None:
        _, inst, problems = res.failures[0]
        small = shrink(inst, suite.check)
        dump_dir.mkdir(parents=True, exist_ok=True)
        path = dump_dir / f"counterexample-{name}-{seed}.json"
        path.write_text(json.dumps({
            "suite": name,
            "seed": seed,
            "instance": small.to_dict(),
            "original": inst.to_dict(),
            "violations": safe_check(suite.check, small) or problems,
        }, indent=2, sort_keys=True))
        res.counterexample = path
    return res
