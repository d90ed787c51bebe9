"""Exception types shared across the package."""

from __future__ import annotations


class LapdiffError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(LapdiffError, ValueError):
    """An operation received arguments outside its contract."""


class ConfigError(LapdiffError, ValueError):
    """A scenario or CLI configuration failed validation."""


class TraceFormatError(LapdiffError, ValueError):
    """A trajectory trace file is malformed.

    Carries the 1-based line number when the offending row is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DivergenceError(LapdiffError, RuntimeError):
    """An iterative solver produced a non-finite estimate.

    Identifies the algorithm, the vehicle whose state went non-finite,
    the scenario time step and the iteration at which it happened.
    """

    def __init__(self, algorithm: str, vehicle: int, time_step: int, iteration: int):
        self.algorithm = algorithm
        self.vehicle = vehicle
        self.time_step = time_step
        self.iteration = iteration
        super().__init__(
            f"{algorithm} diverged: non-finite estimate for vehicle {vehicle} "
            f"at time step {time_step}, iteration {iteration}"
        )
