"""Exception types raised across the package."""


class DropletQEDError(Exception):
    """Base class for all package errors."""


class DomainError(DropletQEDError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class RangeError(DropletQEDError, ValueError):
    """A query falls outside the band covered by a mode table."""


class ConvergenceError(DropletQEDError, RuntimeError):
    """Newton refinement of a resonance failed to converge."""

    def __init__(self, message, seed=None):
        super().__init__(message)
        self.seed = seed


class MissedRootError(DropletQEDError, RuntimeError):
    """Accepted roots disagree with the argument-principle count."""

    def __init__(self, message, expected=None, found=None):
        super().__init__(message)
        self.expected = expected
        self.found = found


class RegimeError(DropletQEDError, RuntimeError):
    """The weak-coupling (Markovian) rate formula is invalid here."""


class ParseError(DropletQEDError, ValueError):
    """Malformed configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DropletQEDError, ValueError):
    """A configuration field violates its bound."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class CurvePointError(DropletQEDError):
    """A decay-curve sample failed; ``radius_um`` names it and the cause is chained."""

    def __init__(self, radius_um, cause):
        super().__init__(f"radius {radius_um:g} um: {type(cause).__name__}: {cause}")
        self.radius_um = radius_um
        self.cause = cause
