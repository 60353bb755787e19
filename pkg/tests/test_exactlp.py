import random
from fractions import Fraction

import pytest

from knaplp.exactlp import (
    LpProblem,
    Status,
    Violation,
    check_point,
    count_fractional,
    solve_lp,
    verify_optimal,
)
from knaplp.instance import INF
from vertex_oracle import lp_optimum, vertices


def small_packing() -> LpProblem:
    p = LpProblem(maximize=True)
    p.add_var("x1", 1, 0, 1)
    p.add_var("x2", 1, 0, 1)
    p.add_row({0: 2, 1: 3}, "<=", 4)
    return p


def test_two_item_packing_vertex():
    p = small_packing()
    sol = solve_lp(p)
    assert sol.status is Status.OPTIMAL
    assert sol.x == (1, Fraction(2, 3))
    assert sol.value == Fraction(5, 3) == lp_optimum(p)
    assert sol.x in set(vertices(p))
    assert verify_optimal(p, sol)


def test_fixed_variable():
    p = LpProblem()
    p.add_var("x1", 1, 0, 0)
    sol = solve_lp(p)
    assert sol.optimal and sol.x == (0,) and sol.value == 0


def test_ray_is_unbounded():
    p = LpProblem()
    p.add_var("x1", 1)
    assert solve_lp(p).status is Status.UNBOUNDED


def test_contradictory_rows_are_infeasible():
    p = LpProblem()
    p.add_var("x1", 1, 0, 5)
    p.add_row({0: 1}, ">=", 3)
    p.add_row({0: 1}, "<=", 2)
    assert solve_lp(p).status is Status.INFEASIBLE


def test_equality_rows_and_minimization():
    p = LpProblem(maximize=False)
    p.add_var("a", 2, 0, 10)
    p.add_var("b", 3, 0, 10)
    p.add_row({0: 1, 1: 1}, "=", 4)
    p.add_row({0: 1, 1: -1}, ">=", 1)
    sol = solve_lp(p)
    assert sol.value == 8 and sol.x == (4, 0)


@pytest.mark.parametrize(
    "x, expected",
    [((1, Fraction(2, 3)), 1), ((0, 0, 5), 0), ((Fraction(1, 2), Fraction(3, 2), 2), 2)],
)
def test_count_fractional(x, expected):
    assert count_fractional(x) == expected


def test_check_point_cases():
    p = small_packing()
    assert check_point(p, (1, Fraction(2, 3))) is None
    assert check_point(p, (1, 1)) == Violation("row", 0)
    assert check_point(p, (-1, 0)) == Violation("lower", 0)
    assert check_point(p, (0, 2)) == Violation("upper", 1)


def test_constraint_text_ignores_objective():
    a, b = small_packing(), small_packing()
    b.objective = [Fraction(5), Fraction(1)]
    assert a.constraint_text() == b.constraint_text()
    assert a.to_lp_text() != b.to_lp_text()


def test_add_row_merges_and_drops_zero_terms():
    p = LpProblem()
    p.add_var()
    p.add_var()
    p.add_row([(0, 1), (1, 2), (0, -1)], "<=", 3)
    assert p.rows[0].coeffs == ((1, Fraction(2)),)


def _random_lp(rng: random.Random) -> LpProblem:
    p = LpProblem(maximize=rng.random() < 0.5)
    n = rng.randint(1, 4)
    for j in range(n):
        lo = rng.randint(-2, 1)
        p.add_var(f"v{j}", rng.randint(-4, 6), lo, lo + rng.randint(0, 4))
    for _ in range(rng.randint(0, 3)):
        coeffs = {j: rng.randint(-3, 5) for j in range(n) if rng.random() < 0.8}
        p.add_row(coeffs, rng.choice(["<=", ">=", "="]), rng.randint(-3, 8))
    return p


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_random_bounded_lps_match_vertex_enumeration(rule):
    rng = random.Random(2024)
    for _ in range(250):
        p = _random_lp(rng)
        sol = solve_lp(p, rule=rule)
        best = lp_optimum(p)
        if best is None:
            assert sol.status is Status.INFEASIBLE
            continue
        assert sol.status is Status.OPTIMAL
        assert sol.value == best
        assert check_point(p, sol.x) is None
        assert sol.x in set(vertices(p))
        assert verify_optimal(p, sol)


def test_solver_is_deterministic():
    rng = random.Random(5)
    for _ in range(30):
        p = _random_lp(rng)
        assert solve_lp(p) == solve_lp(p)


def test_degenerate_problem_terminates():
    # many redundant tight rows through the same vertex
    p = LpProblem()
    for j in range(4):
        p.add_var(f"x{j}", 1, 0, INF)
    for s in range(1, 7):
        p.add_row({j: s + j for j in range(4)}, "<=", 0)
    for rule in ("bland", "dantzig"):
        sol = solve_lp(p, rule=rule)
        assert sol.optimal and sol.value == 0
