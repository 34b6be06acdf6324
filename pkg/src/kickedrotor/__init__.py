"""Classical and quantum dynamics of the kicked rotor and its sign-modulated variant."""

__version__ = "0.1.0"

from kickedrotor.errors import (  # noqa: E402
    DomainError,
    KickedRotorError,
    NumericError,
    NumericGuardError,
    ParameterError,
)
from kickedrotor.model import KickSchedule, PhasePoint, SimParams, make_schedule, marginal_points  # noqa: E402

__all__ = [
    "DomainError",
    "KickSchedule",
    "KickedRotorError",
    "NumericError",
    "NumericGuardError",
    "ParameterError",
    "PhasePoint",
    "SimParams",
    "make_schedule",
    "marginal_points",
]
