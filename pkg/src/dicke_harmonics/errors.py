"""Exception types raised across the package."""


class DickeError(Exception):
    """Base class for all package errors."""


class SamePhaseError(DickeError, ValueError):
    """Two couplings were required to lie strictly on the same side of lambda_c."""


class CriticalPointError(DickeError, ZeroDivisionError):
    """A zero mode energy made a quantity undefined."""


class TruncationError(DickeError, RuntimeError):
    """A Fock-basis cutoff was too small for the requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(DickeError, RuntimeError):
    """An adaptive loop hit its cap before meeting its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(DickeError, ValueError):
    """Invalid scenario configuration."""
