"""Exception hierarchy shared by the numerical modules."""


class UDWError(Exception):
    """Base class for all errors raised by :mod:`udw`."""


class DomainError(UDWError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class RegimeError(UDWError, ValueError):
    """A closed form was requested outside the parameter regime where it holds."""


class InvariantError(UDWError, RuntimeError):
    """A structural invariant (timelike normalization, monotone clock, ...) is violated."""


class ConvergenceError(UDWError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The last two estimates are kept so callers can decide whether the
    partial answer is usable.
    """

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class IllConditionedError(UDWError, ValueError):
    """A pole sits on (or within a few regulators of) the integration contour."""


class DegeneratePoleError(UDWError, ValueError):
    """Two poles that a closed form treats as distinct coincide."""
