"""Exception hierarchy shared across the package.

``ConfigError`` marks problems with user-supplied configuration (CLI exit
code 2); everything else under ``RislocError`` is a runtime/estimation
failure (CLI exit code 3).
"""


class RislocError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RislocError):
    """Invalid or inconsistent experiment configuration."""


class NonRadiatingHarmonicError(RislocError):
    """Harmonic order whose steering equation has no real solution."""


class GeometryMismatchError(RislocError):
    """Code schedule does not match the array geometry."""


class SampleRateError(RislocError):
    """Sample rate too low or incompatible with the switching period."""


class DurationError(RislocError):
    """Requested capture or window is too short."""


class SpectrumResolutionError(RislocError):
    """Spectrum bins too coarse to separate harmonic lines."""


class NoCombFoundError(RislocError):
    """Blind fundamental search found no convincing harmonic comb."""


class EmptyMeasurementError(RislocError):
    """No harmonic orders left after applying exclusions."""


class IllConditionedError(RislocError):
    """Bearing geometry too close to parallel for a position fix."""


class BehindRayError(RislocError):
    """Least-squares crossing point lies behind one of the bearing rays."""


class MissingEntityError(RislocError):
    """Scenario world lacks an entity the scenario requires."""
