"""Exception hierarchy shared by the domain packages.

Each error carries the process exit code the command line reports for it.
Per-record data problems are tallied by the stages and never raised.
"""

from __future__ import annotations


class RtModelError(Exception):
    """Base class for all rtmodel errors."""

    exit_code: int = 2


class InputError(RtModelError):
    """An input file or stream cannot be read."""

    exit_code = 1


class DataValidationError(RtModelError):
    """Input data violates a structural requirement or a prerequisite is missing."""

    exit_code = 2


class ConfigurationError(RtModelError):
    """A configuration value is out of range or inconsistent."""

    exit_code = 3


class ConsistencyError(DataValidationError):
    """Model parameters do not cover the rows/columns of a matrix."""


class UnfittableError(DataValidationError):
    """A response matrix is empty after qualification."""


class FitError(RtModelError):
    """The optimizer met a non-finite objective value."""

    def __init__(self, message: str, iteration: int) -> None:
        super().__init__(message, iteration)
        self.message = message
        self.iteration = iteration

    def __str__(self) -> str:
        return f"{self.message} (iteration {self.iteration})"


class DiagnosticsError(DataValidationError):
    """A diagnostic statistic is undefined for the given input."""


class RegressionError(DataValidationError):
    """A regression model cannot be estimated on the given records."""

    def __init__(self, reason: str, detail: str = "") -> None:
        super().__init__(reason, detail)
        self.reason = reason
        self.detail = detail

    def __str__(self) -> str:
        return f"{self.reason}: {self.detail}" if self.detail else self.reason
