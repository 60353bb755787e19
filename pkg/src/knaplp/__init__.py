"""Exact LP relaxations, guessing schemes and oracles for k-dimensional knapsack."""

from .errors import BudgetExceeded, ContractViolation, Infeasible, UnboundedObjective
from .instance import (
    INF,
    GenParams,
    InstanceError,
    IntegralSolution,
    KnapsackInstance,
    Sense,
    generate_random,
    load_instance,
    normalize,
    parse_instance,
)

__all__ = [
    "INF",
    "BudgetExceeded",
    "ContractViolation",
    "GenParams",
    "Infeasible",
    "InstanceError",
    "IntegralSolution",
    "KnapsackInstance",
    "Sense",
    "UnboundedObjective",
    "generate_random",
    "load_instance",
    "normalize",
    "parse_instance",
]
