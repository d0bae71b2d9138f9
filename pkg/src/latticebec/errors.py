"""Typed exceptions used across the package."""


class LatticeBecError(Exception):
    """Base class for package errors."""


class InvalidParameterError(LatticeBecError, ValueError):
    """A physical parameter is out of its allowed domain."""


class ConfigurationError(LatticeBecError, ValueError):
    """A config key is unknown, malformed, or inconsistent."""


class AccuracyError(LatticeBecError, ArithmeticError):
    """A quadrature or sum did not reach the requested tolerance.

    Carries the best value and the estimated residual.
    """

    def __init__(self, message, value=None, residual=None):
        super().__init__(message)
        self.value = value
        self.residual = residual


class DecompositionUnavailableError(LatticeBecError, ValueError):
    """A Kraus decomposition does not exist for the given channel parameters."""


class IntegrationError(LatticeBecError, ArithmeticError):
    """The master-equation integrator detected a broken invariant."""


class UnsupportedModeError(LatticeBecError, ValueError):
    """The requested mode/dimension combination is not implemented."""


class StateError(LatticeBecError, ValueError):
    """A density matrix violates its invariants (trace, Hermiticity, positivity)."""
