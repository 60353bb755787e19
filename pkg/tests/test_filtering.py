import itertools
import random
from fractions import Fraction

import pytest

from knaplp.errors import ContractViolation
from knaplp.filtering import (
    PtasConfig,
    enumerate_guesses,
    gamma_for,
    guess_count,
    ptas_solve,
    residual,
    trace_lines,
)
from knaplp.instance import INF, GenParams, KnapsackInstance, Sense, generate_random, normalize
from knaplp.oracle import brute_force


def _gs(inst, gamma):
    return [g.g for g in enumerate_guesses(normalize(inst), gamma)]


def test_packing_guesses():
    inst = KnapsackInstance(Sense.PACKING, [[1, 1]], [2], [1, 1], [1, 1])
    assert _gs(inst, 1) == [(0, 0), (0, 1), (1, 0)]
    assert guess_count(normalize(inst), 1) == 3 == (inst.n + 1) ** 1
    assert sorted(_gs(inst, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_covering_guesses(covering_example):
    assert _gs(covering_example, 1) == [(0, 1)]


def _definition_guesses(inst, gamma):
    """Guesses straight from the definition, for comparison."""
    norm = normalize(inst).base
    out = []
    for g in itertools.product(*(range(gamma + 1 if d is INF else min(d, gamma) + 1) for d in norm.d)):
        if sum(g) > gamma:
            continue
        if norm.packing:
            if all(a <= b for a, b in zip(norm.row_activity(g), norm.b)):
                out.append(g)
            continue
        size = sum(g)
        mu = next((i for i, v in enumerate(g) if v), None)
        if size < gamma or mu is None:
            top = g
        else:
            top = [g[i] + (norm.d[i] - g[i] if i <= mu else 0) for i in range(norm.n)]
        if all(a >= b for a, b in zip(norm.row_activity(top), norm.b)):
            out.append(g)
    return sorted(out)


def test_enumeration_matches_definition():
    rng = random.Random(8)
    for _ in range(80):
        sense = rng.choice(list(Sense))
        low = 0 if sense is Sense.PACKING else 1
        params = GenParams(k=rng.randint(1, 2), n=rng.randint(1, 4), bound_range=(low, 2),
                           sense=sense, weight_range=(low, 6), tightness=Fraction(1, 3))
        inst = generate_random(params, rng.randrange(10**6))
        for gamma in range(4):
            got = _gs(inst, gamma)
            assert got == sorted(got)
            assert len(set(got)) == len(got)
            assert got == _definition_guesses(inst, gamma)


def test_residual_examples(packing_example):
    norm = normalize(packing_example)
    res = residual(norm, (0, 1), 1)
    assert res.mu == 1 and res.d_g == (1, 0) and res.b_g == (1,)
    assert res.to_dict()["mu"] == 2
    res = residual(norm, (1, 0), 1)
    assert res.mu == 0 and res.d_g == (0, 0) and res.b_g == (2,)
    res = residual(norm, (0, 0), 1)
    assert res.d_g == (0, 0) and res.b_g == (0,)


def test_residual_covering_clamps_demand():
    inst = KnapsackInstance(Sense.COVERING, [[5, 1]], [3], [1, 1], [2, 2])
    res = residual(normalize(inst), (0, 1), 1)
    # the guess covers 1 of 3, the rest stays as demand
    assert res.b_g == (2,)
    res = residual(normalize(inst), (1, 0), 1)
    assert res.b_g == (0,)


def test_residual_rejects_invalid_guesses(packing_example):
    norm = normalize(packing_example)
    with pytest.raises(ContractViolation):
        residual(norm, (1, 1), 1)
    with pytest.raises(ContractViolation):
        residual(norm, (2, 0), 2)
    with pytest.raises(ContractViolation):
        residual(norm, (1, 1), 2)  # 5 > 4


def test_ptas_examples(packing_example, covering_example):
    res = ptas_solve(packing_example, PtasConfig(gamma=1))
    assert res.solution.value == 1
    res = ptas_solve(packing_example, PtasConfig(gamma=2))
    assert res.solution.value == 1
    assert all(o.residual.guess.size < 2 for o in res.trace)
    assert all(o.lp_value == o.value for o in res.trace)
    res = ptas_solve(covering_example, PtasConfig(gamma=1))
    assert res.solution.value == 2
    assert res.best.residual.guess.g == (0, 1)
    assert res.best.candidate == (1, 1)


def test_epsilon_sets_gamma():
    assert gamma_for(2, Fraction(1, 2)) == 4
    assert gamma_for(3, 2) == 2
    assert PtasConfig(epsilon=Fraction(1, 3)).resolve(1) == 3
    with pytest.raises(ValueError):
        PtasConfig().resolve(1)


def test_trace_lines(packing_example):
    lines = trace_lines(ptas_solve(packing_example, PtasConfig(gamma=1)))
    assert [line["g"] for line in lines] == [[0, 0], [0, 1], [1, 0]]
    assert lines[1]["lp_value"] == "3/2" and lines[1]["rounded_value"] == "1"


def test_ptas_guarantee_on_random_instances():
    rng = random.Random(21)
    for _ in range(25):
        sense = rng.choice(list(Sense))
        inst = generate_random(
            GenParams(k=rng.randint(1, 2), n=rng.randint(2, 5), bound_range=(1, 2), sense=sense,
                      tightness=Fraction(1, 3)),
            rng.randrange(10**6),
        )
        opt = brute_force(inst).value
        norm = normalize(inst)
        for gamma in (1, 2, 3):
            sol = ptas_solve(norm, PtasConfig(gamma=gamma)).solution
            assert inst.is_feasible(norm.to_original(sol.x))
            f = Fraction(inst.k, gamma)
            assert sol.value >= (1 - f) * opt if inst.packing else sol.value <= (1 + f) * opt


def test_parallel_matches_serial():
    inst = generate_random(GenParams(k=2, n=6, bound_range=(1, 3)), 4)
    serial = ptas_solve(inst, PtasConfig(gamma=3))
    parallel = ptas_solve(inst, PtasConfig(gamma=3), workers=2)
    assert serial == parallel
