from typing import Optional


class LabError(Exception):
    """Base class for every failure the lab reports to the user.

    Each subclass carries the process exit code the CLI uses for it.
    """

    exit_code = 2

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InvalidMeasureError(LabError, ValueError):
    """A measure or point cloud violates one of its construction invariants."""


class ConfigError(LabError):
    """The experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        text = f"line {line}: {message}" if line is not None else message
        super().__init__(text)


class InconsistentSetupError(ConfigError):
    """A verification setup violates a precondition of its selected theorem."""


class ResolutionError(LabError, ValueError):
    """A requested scale is finer than the discretisation can resolve."""


class UnsupportedDimensionError(LabError, ValueError):
    """The operation is only implemented for low ambient dimensions."""


class BudgetExceededError(LabError):
    """A computation would exceed its configured size budget."""

    exit_code = 3


class AtomBudgetError(BudgetExceededError):
    pass


class QuadratureBudgetError(BudgetExceededError):
    pass


class DepthExceededError(BudgetExceededError):
    """The self-similar recursion hit max_depth before its base-case criterion."""
