"""Error taxonomy shared across the package.

Three families map to CLI exit codes: configuration problems (2), data
problems (3), and numerical failures (4). Every concrete error subclasses
one family so callers can branch on the family alone.
"""

from __future__ import annotations


class BlockregError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(BlockregError):
    """Invalid parameter, flag, or option combination."""

    exit_code = 2


class DataError(BlockregError):
    """Input data missing, malformed, or insufficient."""

    exit_code = 3


class NumericalError(BlockregError):
    """A numerical procedure failed irrecoverably."""

    exit_code = 4


class InvalidConfig(ConfigError):
    """A configuration value is outside its documented range."""


class SeasonalityTooLarge(ConfigError):
    """Differencing lag m does not leave at least one column."""


class WindowTooLarge(ConfigError):
    """Window width w does not leave at least one window position."""


class DimensionMismatch(ConfigError):
    """Shapes of related inputs disagree."""


class LengthMismatch(ConfigError):
    """Paired vectors have different lengths."""


class UnknownBs(ConfigError):
    """Requested base station is not present in the corpus."""


class ParseError(DataError):
    """A file could not be parsed; message includes the location."""


class InconsistentHours(DataError):
    """Duplicate (bs_id, hour) record in an input file."""


class EmptyCorpus(DataError):
    """No usable rows remain."""


class UncleanCorpus(DataError):
    """A stage requiring cleaned data received missing or negative entries."""


class InsufficientSamples(DataError):
    """Fewer samples than the operation needs."""


class InsufficientHistory(DataError):
    """Not enough preceding hours to build the requested forecast or fit."""


class Underdetermined(DataError):
    """Fewer samples than trainable parameters."""


class ZeroMeanActual(DataError):
    """NRMSE denominator is zero."""


class SingularSystem(NumericalError):
    """A linear system is singular or numerically rank deficient."""
