"""
Exception hierarchy for the localization benchmark.
"""


class LocalizationError(Exception):
    """Base class for every error raised by locbench."""


class InvalidParameterError(LocalizationError, ValueError):
    """A value object or solver setting is outside its valid range."""


class DegenerateGeometryError(LocalizationError):
    """A target/receiver distance fell below the minimum usable distance."""


class ConfigError(LocalizationError):
    """Experiment file or fixture could not be read or validated."""


class SolverError(LocalizationError):
    """Base class for numerical solver failures."""


class DivergenceError(SolverError):
    """Gradient descent produced a non-finite cost (learning rate too large)."""


class EmptyGridError(SolverError):
    """A grid axis has no points."""


class InfeasibleError(SolverError):
    """Every candidate in the search space violates the objective's domain."""
