"""
Exception hierarchy.

All errors derive from ``ValueError`` through ``CurvatureError`` so callers
that only guard against ``ValueError`` still catch them.
"""

from typing import Optional, Sequence


class CurvatureError(ValueError):
    """Base class for every error raised by the package."""


class ExprSyntaxError(CurvatureError):
    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, position: int = 0):
        super().__init__(f"unknown identifier '{name}'", position)
        self.name = name


class ArityError(ExprSyntaxError):
    def __init__(self, name: str, expected: int, got: int, position: int = 0):
        super().__init__(
            f"'{name}' expects {expected} argument(s), got {got}", position
        )
        self.name = name


class JetDomainError(CurvatureError):
    """Evaluation left the domain of an elementary function."""

    def __init__(self, reason: str, subexpression: str, point: Sequence[float]):
        coords = ", ".join(f"{float(c):.6g}" for c in point)
        super().__init__(f"{reason} in '{subexpression}' at ({coords})")
        self.reason = reason
        self.subexpression = subexpression
        self.point = tuple(float(c) for c in point)


class MetricError(CurvatureError):
    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        if point is not None:
            coords = ", ".join(f"{float(c):.6g}" for c in point)
            message = f"{message} at ({coords})"
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


class AdmissibilityError(CurvatureError):
    """A field does not vanish or match up on the chart boundary."""


class QuadratureError(CurvatureError):
    pass


class DivergenceError(CurvatureError):
    pass


class NegativeProbeError(CurvatureError):
    pass


class UnknownCheckError(CurvatureError):
    pass


class BudgetError(CurvatureError):
    pass


class ConvergenceSetupError(CurvatureError):
    pass


class ScenarioError(CurvatureError):
    """Invalid scenario file; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key
