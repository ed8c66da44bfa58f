"""Exception types shared across the toolkit."""


class SvinvError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(SvinvError):
    """A configuration value or combination is invalid (bad family id,
    failed stability/dispersion pre-check, unsupported option)."""


class ParameterError(SvinvError, ValueError):
    """An operation parameter violates its documented range or produces a
    degenerate structure (empty salt dome, zero fault throw)."""


class GenerationExhaustedError(SvinvError):
    """Random model generation could not satisfy the geological constraints
    within the retry cap."""


class SimulationDivergedError(SvinvError):
    """The finite-difference wavefield exceeded the divergence sentinel."""


class DatasetCorruptionError(SvinvError):
    """A dataset blob does not match the sizes declared in its manifest."""


class UnsupportedVersionError(SvinvError):
    """The dataset manifest declares a format version this code cannot read."""
