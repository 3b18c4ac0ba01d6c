"""Exception types raised across the package."""


class NicomError(Exception):
    """Base class for all package errors."""


class DomainMismatchError(NicomError, TypeError):
    """A utility or objective was handed an outcome of a foreign domain."""


class DegenerateDiscountError(NicomError, ValueError):
    """Every discount factor of every agent is zero."""


class NotNeighborsError(NicomError, ValueError):
    """Two histories differ in more than one entry."""


class BudgetExceededError(NicomError, RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, what, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"{what}: instance too large ({required} required, budget {budget})"
        )


class InfeasibleParamsError(NicomError, ValueError):
    """The commitment probability needed for certification exceeds one."""

    def __init__(self, lam, min_T):
        self.lam = lam
        self.min_T = min_T
        hint = ("lower the learning rate" if min_T is None
                else f"smallest certifying T is {min_T}")
        super().__init__(
            f"infeasible: horizon too short or commitment too weak "
            f"(lambda={float(lam):.6g} > 1; {hint})"
        )


class CommitmentPreconditionError(NicomError, ValueError):
    """A commitment mechanism was requested outside its valid parameter range."""


class ConfigError(NicomError, ValueError):
    """Malformed experiment configuration."""
