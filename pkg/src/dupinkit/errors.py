"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class DupinKitError(Exception):
    """Base class for all toolkit errors."""


class ContractError(DupinKitError, ValueError):
    """An argument violates a documented precondition (shape, symmetry, ...)."""


class DomainError(DupinKitError, ValueError):
    """A chart point or stencil node lies outside the chart domain."""


class RankError(DupinKitError, ArithmeticError):
    """The chart jacobian is rank deficient."""


class NotSpacelikeError(DupinKitError, ArithmeticError):
    """Induced metric is not positive definite or the normal is not timelike."""


class UmbilicError(DupinKitError, ArithmeticError):
    """Conformal invariants are undefined at an umbilic point."""


class DegenerateError(DupinKitError, ZeroDivisionError):
    """A ratio of principal curvature differences has a vanishing denominator."""


class ParameterError(DupinKitError, ValueError):
    """Catalog construction parameters are out of range."""


class NotApplicableError(DupinKitError, ValueError):
    """An operation's structural precondition is not met (e.g. cluster count)."""


class ChartEscapeError(DupinKitError, ValueError):
    """A transformed immersion has no sample left inside the target chart."""
