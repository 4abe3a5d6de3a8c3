"""Kinetostatic analysis of an underactuated finger with a spherical proximal module."""

from .errors import (
    ConfigError,
    FingerError,
    GeometryInfeasibleError,
    InvalidArgumentError,
    OracleFailureError,
    SingularConfigurationError,
    StabilityIndeterminateError,
    TransmissionSingularityError,
    UnreachableConfigurationError,
    VirtualMechanismSingularityError,
)
from .kinematics import DesignParams, FingerState, LoopAux, home_pose, state_at
from .transmission import RatioSet, TransmissionMatrix, assemble_T, ratio_set
from .contact import ContactConfig, ContactJacobian, assemble_J
from .stability import ForceSolution, StabilityMap, solve_forces, stability_predicate, sweep

__all__ = [
    "ConfigError",
    "ContactConfig",
    "ContactJacobian",
    "DesignParams",
    "FingerError",
    "FingerState",
    "ForceSolution",
    "GeometryInfeasibleError",
    "InvalidArgumentError",
    "LoopAux",
    "OracleFailureError",
    "RatioSet",
    "SingularConfigurationError",
    "StabilityIndeterminateError",
    "StabilityMap",
    "TransmissionMatrix",
    "TransmissionSingularityError",
    "UnreachableConfigurationError",
    "VirtualMechanismSingularityError",
    "assemble_J",
    "assemble_T",
    "home_pose",
    "ratio_set",
    "solve_forces",
    "stability_predicate",
    "state_at",
    "sweep",
]
