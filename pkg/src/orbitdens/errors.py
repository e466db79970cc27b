"""Exception hierarchy shared across the package."""


class OrbitDensError(Exception):
    """Base class for all errors raised by orbitdens."""


class DomainError(OrbitDensError, ValueError):
    """A position or interval lies outside the region where an operation is defined."""


class NoClassicalMotionError(DomainError):
    """The energy does not exceed the potential minimum."""


class AccuracyError(OrbitDensError, ArithmeticError):
    """A numerical refinement failed to converge.

    ``deltas`` holds the achieved differences between refinements.
    """

    def __init__(self, message, deltas=None):
        super().__init__(message)
        self.deltas = deltas


class OpenShellError(OrbitDensError, ValueError):
    """The requested particle number splits a degenerate shell."""


class ConfigError(OrbitDensError, ValueError):
    """Invalid run configuration. ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class WindowError(DomainError):
    """Evaluation point lies outside the central window of an approximation."""


class ResolutionError(OrbitDensError, ValueError):
    """The grid is too coarse for the requested derivative."""


class AlignmentError(OrbitDensError, ValueError):
    """Two fields are not sampled on the same grid."""
