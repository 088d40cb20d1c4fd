"""Exception types shared across the package."""


class BailabError(Exception):
    """Base class for every package-specific error."""


class EqualMeansError(BailabError, ValueError):
    """Both arms have the same mean, so there is no unique best arm."""


class InvalidBoundsError(BailabError, ValueError):
    """Truncation bounds are reversed (lower > upper)."""


class NoObservationsError(BailabError, ValueError):
    """A statistic was requested for an arm with no recorded rewards."""


class OutOfOrderError(BailabError, ValueError):
    """Rounds must be prepared and recorded consecutively, starting at 1."""


class NonPositiveSigmaError(BailabError, ValueError):
    """Standard deviations must be strictly positive."""


class NonPositiveVarianceError(BailabError, ValueError):
    """A variance that must be strictly positive was zero or negative."""


class ParseError(BailabError, ValueError):
    """A spec file could not be parsed; the message carries line/field info."""


class ValidationError(BailabError, ValueError):
    """A parsed configuration value is outside its allowed domain."""
