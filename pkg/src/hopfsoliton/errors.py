"""Exception types raised across the package."""


class HopfError(Exception):
    """Base class for all errors raised by hopfsoliton."""


class ParameterError(HopfError, ValueError):
    """Hopf parameters or numerical controls out of their admissible range."""


class DomainError(HopfError, ValueError):
    """An argument lies outside the domain of the function."""


class ChartDomainError(DomainError):
    """A point lies on a coordinate axis, outside the logarithmic chart."""


class DegenerateMetricError(HopfError, ArithmeticError):
    """The metric is not positive definite at the evaluation point."""


class RootFindingError(HopfError, RuntimeError):
    """A bracketed root search failed to converge."""


class NewtonDivergenceError(HopfError, RuntimeError):
    """Newton iteration for an implicit time step failed after all retries."""


class AnsatzError(HopfError, ValueError):
    """The profile does not have the structure an operation requires."""


class InitialDataError(HopfError, ValueError):
    """Initial data for the flow lack the required asymptotics at the ends of the line."""


class WindowExitError(HopfError, RuntimeError):
    """The front of the flow has travelled out of the computational window."""
