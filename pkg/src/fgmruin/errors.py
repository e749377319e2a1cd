"""Exception types used across the package.

The hierarchy separates caller mistakes (bad inputs, infeasible model
parameters) from solver-side failures (structural assumptions violated,
ill-conditioned linear algebra), so that callers and the CLI can map
failures to distinct exit codes.
"""

from __future__ import annotations

__all__ = [
    "RuinModelError",
    "InputError",
    "LoadingError",
    "StructuralError",
    "UnsupportedStructureError",
    "ConditioningError",
]


class RuinModelError(Exception):
    """Base class for all package-specific errors."""


class InputError(RuinModelError, ValueError):
    """An argument is outside its documented domain."""


class LoadingError(InputError):
    """The net profit condition c * E[W] > E[X] is violated.

    Survival probabilities degenerate without positive loading, so model
    construction refuses these parameters outright.
    """


class StructuralError(RuinModelError):
    """A structural assumption of a solver does not hold.

    Examples: a transform denominator with no growing root to eliminate,
    an exponential sum with an unpaired complex term, or a survival value
    escaping (0, 1).
    """


class UnsupportedStructureError(StructuralError):
    """The input is valid but has a shape the implementation does not cover,
    such as repeated transform poles."""


class ConditioningError(RuinModelError):
    """A numerical result cannot be trusted.

    Raised when internal consistency residuals exceed their gates or a
    linear system is too ill-conditioned to solve reliably.
    """
