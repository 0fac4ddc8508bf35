"""Exception types shared across the package."""

from __future__ import annotations


class WulffFlowError(Exception):
    """Base class for all package errors."""


class DomainError(WulffFlowError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(WulffFlowError, ValueError):
    """A configuration value is missing, malformed or inconsistent."""


class NumericalError(WulffFlowError, ArithmeticError):
    """An iterative method failed or a computed quantity is degenerate."""


class AdmissibilityError(WulffFlowError, ValueError):
    """The anisotropy fails the uniform convexity admission test."""


class StiffnessError(NumericalError):
    """The admissible time step collapsed below its floor."""


class ConvexityLost(WulffFlowError):
    """A state stopped being strictly convex.

    Raised by the flow driver when a curvature evaluation flags a node with a
    nonpositive principal curvature (or radius). ``node`` is the flat index of
    the first offending node and ``value`` the offending eigenvalue.
    """

    def __init__(self, message: str, *, node: int = -1, value: float = float("nan"),
                 time: float = float("nan")):
        super().__init__(message)
        self.node = node
        self.value = value
        self.time = time
