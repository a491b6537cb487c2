"""Exception hierarchy shared by all sphexit modules."""


class SphexitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SphexitError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class AccuracyError(SphexitError, ArithmeticError):
    """A numerical routine could not reach the requested tolerance."""


class BlowUpError(DomainError):
    """The Riccati solution leaves the finite range before the end point."""


class GridError(DomainError):
    """A profile grid is too coarse for the requested diagnostic."""


class NonConvergenceError(SphexitError):
    """Some simulated path hit the step cap without leaving the domain."""
