"""k-dimensional knapsack instances: data model, validation and generation.

An instance is ``(A, b, c, d)`` plus a sense.  Packing asks for
``max c.x`` subject to ``Ax <= b``, covering for ``min c.x`` subject to
``Ax >= b``; both require integral ``0 <= x <= d``.  Weights, limits and
finite copy bounds are non-negative integers, costs are non-negative
rationals, and a copy bound may be the distinguished value :data:`INF`.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence, Union


class InstanceError(ValueError):
    """Raised for malformed or unusable instance data."""


class Sense(str, enum.Enum):
    PACKING = "packing"
    COVERING = "covering"


class Unbounded(enum.Enum):
    """Marker for an absent copy bound (``d_i = +inf``)."""

    INF = "inf"

    def __repr__(self) -> str:
        return "INF"


INF = Unbounded.INF

Bound = Union[int, Unbounded]


def parse_rational(value: Any, path: str) -> Fraction:
    if isinstance(value, bool):
        raise InstanceError(f"{path}: expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise InstanceError(f"{path}: expected an integer or 'p/q' string, got {value!r}")


def format_rational(q: Fraction) -> int | str:
    """JSON rendering of a rational: a plain int when integral, else ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return int(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _int_entry(value: Any, path: str, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{path}: expected an integer {what}, got {value!r}")
    if value < 0:
        raise InstanceError(f"{path}: negative {what}")
    return value


@dataclass(frozen=True)
class KnapsackInstance:
    sense: Sense
    A: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]
    c: tuple[Fraction, ...]
    d: tuple[Bound, ...]
    _n: int = field(default=-1, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "A", tuple(tuple(row) for row in self.A))
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "c", tuple(Fraction(v) for v in self.c))
        object.__setattr__(self, "d", tuple(self.d))
        n = len(self.c) if self._n < 0 else self._n
        object.__setattr__(self, "_n", n)
        self.validate()

    @property
    def k(self) -> int:
        return len(self.b)

    @property
    def n(self) -> int:
        return self._n

    @property
    def packing(self) -> bool:
        return self.sense is Sense.PACKING

    @property
    def bounded(self) -> bool:
        return all(v is not INF for v in self.d)

    def validate(self) -> None:
        if len(self.A) != self.k:
            raise InstanceError(f"A: expected {self.k} rows, got {len(self.A)}")
        for j, row in enumerate(self.A):
            if len(row) != self.n:
                raise InstanceError(f"A[{j}]: expected {self.n} columns, got {len(row)}")
            for i, a in enumerate(row):
                _int_entry(a, f"A[{j}][{i}]", "weight")
        for j, v in enumerate(self.b):
            _int_entry(v, f"b[{j}]", "limit")
        if len(self.c) != self.n or len(self.d) != self.n:
            raise InstanceError(
                f"c/d: expected length {self.n}, got {len(self.c)} and {len(self.d)}"
            )
        for i, v in enumerate(self.c):
            if v < 0:
                raise InstanceError(f"c[{i}]: negative cost")
        for i, v in enumerate(self.d):
            if v is not INF:
                _int_entry(v, f"d[{i}]", "bound")

    def with_bounds(self, d: Sequence[Bound]) -> "KnapsackInstance":
        return KnapsackInstance(self.sense, self.A, self.b, self.c, tuple(d), _n=self.n)

    def with_costs(self, c: Sequence[Fraction]) -> "KnapsackInstance":
        return KnapsackInstance(self.sense, self.A, self.b, tuple(c), self.d, _n=self.n)

    def with_rhs(self, b: Sequence[int]) -> "KnapsackInstance":
        return KnapsackInstance(self.sense, self.A, tuple(b), self.c, self.d, _n=self.n)

    def value(self, x: Sequence[int]) -> Fraction:
        return sum((ci * xi for ci, xi in zip(self.c, x)), Fraction(0))

    def row_activity(self, x: Sequence) -> list:
        return [sum(a * xi for a, xi in zip(row, x)) for row in self.A]

    def is_feasible(self, x: Sequence) -> bool:
        """Exact membership of ``x`` in the relaxation box and rows (any number type)."""
        if len(x) != self.n:
            return False
        for xi, di in zip(x, self.d):
            if xi < 0 or (di is not INF and xi > di):
                return False
        act = self.row_activity(x)
        if self.packing:
            return all(a <= bj for a, bj in zip(act, self.b))
        return all(a >= bj for a, bj in zip(act, self.b))

    def is_integral_feasible(self, x: Sequence) -> bool:
        return all(Fraction(v).denominator == 1 for v in x) and self.is_feasible(x)

    def to_dict(self) -> dict:
        return {
            "sense": self.sense.value,
            "k": self.k,
            "n": self.n,
            "A": [list(row) for row in self.A],
            "b": list(self.b),
            "c": [format_rational(v) for v in self.c],
            "d": ["inf" if v is INF else v for v in self.d],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IntegralSolution:
    x: tuple[int, ...]
    value: Fraction

    @classmethod
    def of(cls, inst: KnapsackInstance, x: Sequence[int]) -> "IntegralSolution":
        x = tuple(int(v) for v in x)
        return cls(x, inst.value(x))

    def to_dict(self) -> dict:
        return {"x": list(self.x), "value": str(self.value)}

    @classmethod
    def from_dict(cls, doc: dict) -> "IntegralSolution":
        return cls(tuple(int(v) for v in doc["x"]), parse_rational(doc["value"], "value"))


def parse_instance(doc: dict | str) -> KnapsackInstance:
    """Build an instance from its JSON document (a dict or a JSON string)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("malformed document: expected a JSON object")
    for key in ("sense", "A", "b", "c", "d"):
        if key not in doc:
            raise InstanceError(f"{key}: missing field")
    try:
        sense = Sense(doc["sense"])
    except ValueError:
        raise InstanceError(f"sense: expected 'packing' or 'covering', got {doc['sense']!r}") from None

    A, b, c, d = doc["A"], doc["b"], doc["c"], doc["d"]
    for key, val in (("A", A), ("b", b), ("c", c), ("d", d)):
        if not isinstance(val, list):
            raise InstanceError(f"{key}: expected a list")
    for j, row in enumerate(A):
        if not isinstance(row, list):
            raise InstanceError(f"A[{j}]: expected a list")
    k = doc.get("k", len(b))
    n = doc.get("n", len(c))
    if k != len(b):
        raise InstanceError(f"b: expected length k={k}, got {len(b)}")
    if n != len(c):
        raise InstanceError(f"c: expected length n={n}, got {len(c)}")
    costs = [parse_rational(v, f"c[{i}]") for i, v in enumerate(c)]
    bounds: list[Bound] = []
    for i, v in enumerate(d):
        if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
            bounds.append(INF)
        else:
            bounds.append(v)
    return KnapsackInstance(sense, A, b, costs, bounds, _n=n)


def load_instance(path) -> KnapsackInstance:
    with open(path) as fh:
        return parse_instance(fh.read())


@dataclass(frozen=True)
class NormalizedInstance:
    """Items re-indexed so costs are non-decreasing.

    ``perm[i]`` is the original index of normalized item ``i``.  The sort is
    stable, so among equal costs the later item counts as more profitable.
    """

    base: KnapsackInstance
    perm: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.base.k

    def to_original(self, x: Sequence) -> tuple:
        out = [None] * len(self.perm)
        for i, orig in enumerate(self.perm):
            out[orig] = x[i]
        return tuple(out)

    def from_original(self, x: Sequence) -> tuple:
        return tuple(x[orig] for orig in self.perm)


def normalize(inst: KnapsackInstance) -> NormalizedInstance:
    perm = tuple(sorted(range(inst.n), key=lambda i: inst.c[i]))
    A = [[row[i] for i in perm] for row in inst.A]
    base = KnapsackInstance(
        inst.sense, A, inst.b, [inst.c[i] for i in perm], [inst.d[i] for i in perm], _n=inst.n
    )
    return NormalizedInstance(base, perm)


def as_normalized(inst: KnapsackInstance | NormalizedInstance) -> NormalizedInstance:
    if isinstance(inst, NormalizedInstance):
        return inst
    return normalize(inst)


def cap_unbounded(inst: KnapsackInstance) -> KnapsackInstance:
    """Replace every infinite copy bound by a finite one that keeps the integer optimum."""
    if inst.bounded:
        return inst
    d: list[Bound] = []
    for i, di in enumerate(inst.d):
        if di is not INF:
            d.append(di)
            continue
        col = [(row[i], bj) for row, bj in zip(inst.A, inst.b) if row[i] > 0]
        if not col:
            if inst.packing and inst.c[i] > 0:
                raise InstanceError(f"d[{i}]: unbounded objective (item {i} uses no capacity)")
            d.append(0)
        elif inst.packing:
            d.append(min(bj // a for a, bj in col))
        else:
            d.append(max(-(-bj // a) for a, bj in col))
    return inst.with_bounds(d)


@dataclass(frozen=True)
class GenParams:
    k: int = 1
    n: int = 5
    weight_range: tuple[int, int] = (1, 9)
    cost_range: tuple[int, int] = (1, 9)
    bound_range: tuple[int, int] = (1, 1)
    sense: Sense = Sense.PACKING
    tightness: Fraction = Fraction(1, 2)
    min_rhs: int = 1


def generate_random(params: GenParams, seed: int) -> KnapsackInstance:
    """Draw a feasible, non-trivial instance; identical for identical ``(params, seed)``."""
    p = params
    if p.k < 1 or p.n < 1:
        raise InstanceError("impossible parameter combination: k and n must be >= 1")
    for name in ("weight_range", "cost_range", "bound_range"):
        lo, hi = getattr(p, name)
        if lo > hi or lo < 0:
            raise InstanceError(f"impossible parameter combination: {name}={lo, hi}")
    t = Fraction(p.tightness)
    if not 0 <= t <= 1:
        raise InstanceError("impossible parameter combination: tightness outside [0, 1]")

    rng = random.Random(seed)
    A = [[rng.randint(*p.weight_range) for _ in range(p.n)] for _ in range(p.k)]
    c = [rng.randint(*p.cost_range) for _ in range(p.n)]
    d = [rng.randint(*p.bound_range) for _ in range(p.n)]
    b = []
    for row in A:
        total = sum(a * di for a, di in zip(row, d))
        if Sense(p.sense) is Sense.PACKING:
            biggest = max((a for a, di in zip(row, d) if di > 0), default=0)
            b.append(biggest + int(t * (max(total - biggest, 0))))
        else:
            if total < p.min_rhs:
                raise InstanceError("infeasible generation: A.d below the minimum demand")
            b.append(max(p.min_rhs, int(t * total)))
    return KnapsackInstance(p.sense, A, b, c, d, _n=p.n)
