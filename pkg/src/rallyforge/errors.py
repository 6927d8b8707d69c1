"""Exception hierarchy shared across the package.

Everything raised on purpose derives from RallyForgeError so callers (and the
CLI) can distinguish expected failures from genuine bugs.
"""


class RallyForgeError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RallyForgeError):
    """Input data violates a documented contract (bad field, illegal state)."""


class ParseError(RallyForgeError):
    """A document could not be parsed at all.

    Carries the line/column of the syntax error when known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ConfigError(RallyForgeError):
    """A configuration value is out of range or malformed."""


class InsufficientCorrespondences(RallyForgeError):
    """Fewer point pairs than the minimum needed to fit a mapping."""


class DegenerateConfiguration(RallyForgeError):
    """Point layout does not determine a unique, invertible mapping."""


class ProjectionSingularity(RallyForgeError):
    """A projective mapping sent a point to infinity (homogeneous w ~ 0)."""


class CalibrationError(RallyForgeError):
    """Camera calibration failed or exceeded the accuracy gate.

    ``report`` holds the reprojection statistics that triggered the failure,
    when they exist.
    """

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class InsufficientData(RallyForgeError):
    """Not enough samples present to run an estimator."""


class PlanningError(RallyForgeError):
    """A camera plan violates its own budget or scheduling constraints."""


class RangeError(RallyForgeError):
    """A query time or index falls outside the covered span."""


class DataUnavailable(RallyForgeError):
    """A requested derived quantity cannot be computed from the given inputs."""
