"""Exception types shared across pipelines; the CLI maps each to an exit code."""


class ContractViolation(RuntimeError):
    """A documented precondition or guarantee did not hold."""


class Infeasible(RuntimeError):
    """The instance has no feasible integral solution."""


class UnboundedObjective(RuntimeError):
    """The objective can be increased without limit."""


class BudgetExceeded(RuntimeError):
    """An exact oracle would exceed its configured state budget."""
