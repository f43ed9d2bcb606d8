"""Fog-style social sensing middleware on a deterministic event simulator."""

from .rng import Rng
from .sim import Event, InvariantViolation, LinkSchedule, SimTime, Simulator, TraceRecord

__version__ = "0.1.0"

__all__ = [
    "Event",
    "InvariantViolation",
    "LinkSchedule",
    "Rng",
    "SimTime",
    "Simulator",
    "TraceRecord",
    "__version__",
]
