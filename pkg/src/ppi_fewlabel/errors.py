"""Exception types raised across the package."""


class PPIError(Exception):
    """Base class for all package errors."""


class InsufficientData(PPIError, ValueError):
    """Too few observations for the requested statistic or estimator."""


class ShapeError(PPIError, ValueError):
    """Paired vectors have mismatched lengths."""


class DegenerateVariance(PPIError, ValueError):
    """A variance that appears in a denominator is zero."""


class OptimizationDiverged(PPIError, RuntimeError):
    """The sigmoid fit produced a non-finite objective."""


class SpecError(PPIError, ValueError):
    """Invalid joint distribution specification."""


class FormatError(PPIError, ValueError):
    """Malformed dataset file."""


class IoError(PPIError, OSError):
    """Failure reading or writing a file."""
