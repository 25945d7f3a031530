"""Typed errors raised across the toolkit.

Every failure mode callers are expected to handle gets its own class so that
tests and the CLI can dispatch on type instead of parsing messages.
"""


class LpvFlowError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(LpvFlowError):
    """An input document (system, gain box, scenario) failed validation."""


class DimensionMismatch(LpvFlowError):
    """Matrix or vector dimensions are inconsistent with the operation."""


class SingularMatrix(LpvFlowError):
    """A linear solve hit a pivot too small to trust."""


class NotSymmetric(LpvFlowError):
    """A matrix expected to be symmetric is not, beyond tolerance."""


class ParamOutOfRange(LpvFlowError):
    """A parameter value lies outside the admissible parameter box."""


class NotHurwitz(LpvFlowError):
    """A matrix expected to be Hurwitz stable is not (or is inconclusive).

    When raised mid-simulation, ``partial_trace`` carries the trace collected
    up to the failure.
    """

    def __init__(self, message: str, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class NotHurwitzInput(LpvFlowError):
    """An input matrix to a certificate search is not Hurwitz stable."""


class ZeroPivot(LpvFlowError):
    """A Routh table first-column entry hit exactly zero; the sign test is
    inconclusive."""


class DegreeGuard(LpvFlowError):
    """Symbolic machinery refused an input above its size guard."""


class OutsideManifold(LpvFlowError):
    """A point lies outside the constraint box beyond the drift band."""


class NoStabilizingInit(LpvFlowError):
    """No stabilizing initial gain was found for the Riccati iteration."""


class NotConverged(LpvFlowError):
    """An iterative solver exhausted its budget without converging."""


class CareFailure(LpvFlowError):
    """A Riccati solve failed at a specific parameter value."""

    def __init__(self, message: str, rho=None):
        super().__init__(message)
        self.rho = rho


class DriftTooLarge(LpvFlowError):
    """Integrator drift out of the constraint box exceeded the clamp band.

    ``partial_trace`` carries the trace collected up to the failure.
    """

    def __init__(self, message: str, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class IntegrationError(LpvFlowError):
    """The ODE integrator could not proceed (step size underflow)."""

    def __init__(self, message: str, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class MismatchedScenarios(LpvFlowError):
    """Two traces being compared were not produced from the same scenario."""
