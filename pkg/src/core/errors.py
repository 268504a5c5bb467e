# src/core/errors.py
from __future__ import annotations


class SatclError(Exception):
    """Base class for every error raised by satcl."""


class InvalidInput(SatclError, ValueError):
    """Malformed user or caller input (CLI exit code 1)."""


class InvalidRegion(InvalidInput):
    pass


class TaskTooLarge(InvalidInput):
    pass


class InstanceTooLarge(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class UnknownAlgorithm(InvalidInput):
    pass


class InfeasibleRegion(SatclError):
    pass


class NotLiftable(SatclError):
    pass


class InfeasibleStep(SatclError):
    """Raised by a step whose Sat_{1:t} is empty or could not be shown nonempty."""

    def __init__(self, t: int, reason: str = "empty"):
        super().__init__(f"no feasible parameter at t={t} ({reason})")
        self.t = t
        self.reason = reason
