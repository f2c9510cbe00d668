"""Exception types shared across the package."""


class SensilabError(Exception):
    """Base class for errors raised by this package."""


class PrecisionExhaustedError(SensilabError):
    """Raised when an orbit would outrun the bits carried by its points.

    Expanding maps consume low-order bits at every step.  Once fewer than 64
    guard bits would remain at the requested horizon, iterating further says
    nothing about a generic real point, so the operation refuses to continue
    rather than return grid artifacts.
    """


class MapMismatchError(SensilabError, ValueError):
    """Raised when an operation receives a derived metric built from one map
    but is asked to evaluate it against a different map."""


class SpecFormatError(SensilabError, ValueError):
    """Raised when a textual map or metric description cannot be parsed."""
