"""Typed failures raised by the analysis code."""


class FingerError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(FingerError, ValueError):
    """Non-finite or otherwise malformed input to a geometric primitive."""


class SingularConfigurationError(FingerError):
    """Degenerate geometric input, e.g. parallel planes or a zero-length vector."""


class GeometryInfeasibleError(FingerError):
    """Design parameters or a closed form leave the real domain."""


class UnreachableConfigurationError(FingerError):
    """A loop cannot be assembled at the requested joint angles."""


class TransmissionSingularityError(FingerError):
    """A transmission-ratio denominator vanished (dead point)."""


class VirtualMechanismSingularityError(FingerError):
    """The virtual two-DOF mechanism is at nu1 = 0 or pi."""


class StabilityIndeterminateError(FingerError):
    """The force system is singular or too ill-conditioned to solve."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class OracleFailureError(FingerError):
    """A validation solver did not converge."""


class ConfigError(FingerError):
    """Invalid run configuration."""
