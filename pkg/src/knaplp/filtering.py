"""Guess enumeration, residual problems and the per-guess LP approximation scheme.

Items are in cost order (see :func:`knaplp.instance.normalize`).  A guess
``g`` stands for the ``gamma`` most profitable items of a solution.  Its
residual problem may only use items up to ``mu(g)``, the cheapest guessed
item, with the capacity that ``g`` leaves over.

All vectors here are in normalized (cost-sorted) coordinates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Iterator, Optional, Sequence

from .errors import ContractViolation, Infeasible
from .instance import (
    INF,
    Bound,
    IntegralSolution,
    KnapsackInstance,
    NormalizedInstance,
    as_normalized,
)
from .rounding import round_extreme, solve_relaxation


@dataclass(frozen=True)
class Guess:
    g: tuple[int, ...]

    @property
    def size(self) -> int:
        return sum(self.g)

    @property
    def mu(self) -> Optional[int]:
        """0-based index of the cheapest guessed item, ``None`` for the empty guess."""
        return next((i for i, v in enumerate(self.g) if v > 0), None)


@dataclass(frozen=True)
class ResidualProblem:
    guess: Guess
    mu: Optional[int]
    d_g: tuple[Bound, ...]
    b_g: tuple[int, ...]

    def instance(self, inst: NormalizedInstance) -> KnapsackInstance:
        base = inst.base
        return KnapsackInstance(base.sense, base.A, self.b_g, base.c, self.d_g, _n=base.n)

    def to_dict(self) -> dict:
        return {
            "g": list(self.guess.g),
            "mu": None if self.mu is None else self.mu + 1,
            "b_g": list(self.b_g),
            "d_g": ["inf" if v is INF else v for v in self.d_g],
        }


@dataclass(frozen=True)
class PtasConfig:
    epsilon: Optional[Fraction] = None
    gamma: Optional[int] = None

    def resolve(self, k: int) -> int:
        if self.gamma is not None:
            if self.gamma < 0:
                raise ValueError("gamma must be non-negative")
            return self.gamma
        if self.epsilon is None:
            raise ValueError("either gamma or epsilon is required")
        return gamma_for(k, self.epsilon)


def gamma_for(k: int, epsilon) -> int:
    """``ceil(k / epsilon)``, at least 1."""
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return max(1, math.ceil(k / eps))


def guarantee_factor(k: int, gamma: int) -> Optional[Fraction]:
    """``k/gamma``, or ``None`` when ``gamma = 0`` (no guarantee)."""
    return Fraction(k, gamma) if gamma > 0 else None


def _residual_parts(base: KnapsackInstance, g: Sequence[int], gamma: int):
    n, k = base.n, base.k
    size = sum(g)
    mu = next((i for i, v in enumerate(g) if v > 0), None)
    if size < gamma or mu is None:
        return mu, (0,) * n, (0,) * k
    d_g = tuple(
        (base.d[i] if base.d[i] is INF else base.d[i] - g[i]) if i <= mu else 0 for i in range(n)
    )
    used = base.row_activity(g)
    if base.packing:
        b_g = tuple(bj - u for bj, u in zip(base.b, used))
    else:
        b_g = tuple(max(0, bj - u) for bj, u in zip(base.b, used))
    return mu, d_g, b_g


def _admissible_cover(base: KnapsackInstance, g: Sequence[int], d_g: Sequence[Bound]) -> bool:
    if any(v is INF for v in d_g):
        return True
    top = [gi + di for gi, di in zip(g, d_g)]
    return all(a >= bj for a, bj in zip(base.row_activity(top), base.b))


def enumerate_guesses(inst: NormalizedInstance | KnapsackInstance, gamma: int) -> Iterator[Guess]:
    """Every valid guess exactly once, in lexicographic order of ``g``.

    Packing guesses satisfy ``Ag <= b``; covering guesses must be
    admissible, ``A(g + d^g) >= b``.  The stream is lazy.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    base = as_normalized(inst).base
    n, k = base.n, base.k
    cols = [[row[i] for row in base.A] for i in range(n)]
    g = [0] * n
    used = [0] * k

    def rec(i: int, left: int) -> Iterator[Guess]:
        if i == n:
            if base.packing:
                yield Guess(tuple(g))
            else:
                _, d_g, _ = _residual_parts(base, g, gamma)
                if _admissible_cover(base, g, d_g):
                    yield Guess(tuple(g))
            return
        cap = left if base.d[i] is INF else min(left, base.d[i])
        col = cols[i]
        for t in range(cap + 1):
            if t:
                for j in range(k):
                    used[j] += col[j]
                if base.packing and any(used[j] > base.b[j] for j in range(k)):
                    for j in range(k):
                        used[j] -= col[j] * t
                    break
            g[i] = t
            yield from rec(i + 1, left - t)
        else:
            for j in range(k):
                used[j] -= col[j] * cap
        g[i] = 0

    yield from rec(0, gamma)


def guess_count(inst: NormalizedInstance | KnapsackInstance, gamma: int) -> int:
    return sum(1 for _ in enumerate_guesses(inst, gamma))


def _check_guess(base: KnapsackInstance, g: Sequence[int], gamma: int) -> None:
    if len(g) != base.n or any(v < 0 for v in g):
        raise ContractViolation("guess has the wrong length or a negative entry")
    if sum(g) > gamma:
        raise ContractViolation(f"guess size {sum(g)} exceeds gamma={gamma}")
    for gi, di in zip(g, base.d):
        if di is not INF and gi > di:
            raise ContractViolation("guess exceeds the copy bounds")
    if base.packing and not all(a <= bj for a, bj in zip(base.row_activity(g), base.b)):
        raise ContractViolation("guess violates Ag <= b")


def residual(inst: NormalizedInstance, g: Guess | Sequence[int], gamma: int) -> ResidualProblem:
    """The residual problem ``(A, b^g, c, d^g)`` of a guess.

    A guess smaller than ``gamma`` (or the empty guess) is the whole
    solution, so its residual is all-zero.
    """
    inst = as_normalized(inst)
    guess = g if isinstance(g, Guess) else Guess(tuple(g))
    base = inst.base
    _check_guess(base, guess.g, gamma)
    mu, d_g, b_g = _residual_parts(base, guess.g, gamma)
    if not base.packing and not _admissible_cover(base, guess.g, d_g):
        raise ContractViolation("covering guess is not admissible")
    return ResidualProblem(guess, mu, d_g, b_g)


@dataclass(frozen=True)
class GuessOutcome:
    residual: ResidualProblem
    lp_value: Fraction  # c.g + residual LP optimum
    candidate: tuple[int, ...]
    value: Fraction  # c.candidate

    def to_dict(self) -> dict:
        out = self.residual.to_dict()
        out.update(
            lp_value=str(self.lp_value),
            rounded=list(self.candidate),
            rounded_value=str(self.value),
        )
        return out


def solve_guess(inst: NormalizedInstance, gamma: int, guess: Guess) -> GuessOutcome:
    """Solve one residual LP, round its extreme point and add the guess back."""
    res = residual(inst, guess, gamma)
    rinst = res.instance(inst)
    sol = solve_relaxation(rinst)
    if not sol.optimal:
        raise ContractViolation(f"residual LP for {guess.g} is {sol.status.value}")
    rounded, _ = round_extreme(rinst, sol)
    cand = tuple(gi + xi for gi, xi in zip(guess.g, rounded.x))
    base = inst.base
    cg = base.value(guess.g)
    return GuessOutcome(res, cg + sol.value, cand, base.value(cand))


def _run(inst: NormalizedInstance, gamma: int, fn, workers: int) -> list:
    guesses = list(enumerate_guesses(inst, gamma))
    task = partial(fn, inst, gamma)
    if workers > 1 and len(guesses) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, guesses, chunksize=max(1, len(guesses) // (4 * workers))))
    return [task(g) for g in guesses]


def best_outcome(outcomes: Sequence, packing: bool, key):
    """Best by ``key`` (max packing / min covering), ties to the lexicographically smallest guess.

    Independent of the order of ``outcomes``.
    """
    best = None
    for out in outcomes:
        v = key(out)
        if best is None:
            best = out
            continue
        bv = key(best)
        if (v > bv if packing else v < bv) or (v == bv and out.residual.guess.g < best.residual.guess.g):
            best = out
    return best


@dataclass(frozen=True)
class PtasResult:
    solution: IntegralSolution
    gamma: int
    best: GuessOutcome
    trace: tuple[GuessOutcome, ...]


def ptas_solve(
    inst: NormalizedInstance | KnapsackInstance, cfg: PtasConfig, workers: int = 1
) -> PtasResult:
    """Solve every residual LP, round, and keep the best integral candidate.

    Packing returns at least ``(1 - k/gamma) OPT``; covering at most
    ``(1 + k/gamma) OPT``.  The solution is in normalized coordinates.
    """
    inst = as_normalized(inst)
    base = inst.base
    gamma = cfg.resolve(base.k)
    if not base.packing and not base.bounded:
        raise ContractViolation("covering requires finite d; apply cap_unbounded first")
    outcomes = _run(inst, gamma, solve_guess, workers)
    if not outcomes:
        raise Infeasible("no admissible guess: the covering instance is infeasible")
    best = best_outcome(outcomes, base.packing, key=lambda o: o.value)
    sol = IntegralSolution.of(base, best.candidate)
    if not base.is_feasible(sol.x):
        raise ContractViolation("approximation scheme produced an infeasible point")
    return PtasResult(sol, gamma, best, tuple(outcomes))


def trace_lines(result: PtasResult) -> list[dict]:
    return [o.to_dict() for o in result.trace]

