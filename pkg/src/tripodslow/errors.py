"""Exception types raised by the simulator."""


class TripodError(Exception):
    """Base class for all simulator errors."""


class ZeroControlField(TripodError, ValueError):
    """The total control Rabi frequency vanishes where it must not.

    Adiabatic elimination (and every bright/dark-state quantity) is undefined
    at such samples, so the failure is surfaced instead of clamped.
    """

    def __init__(self, message, count=0):
        super().__init__(message)
        self.count = count


class StepTooLarge(TripodError, ValueError):
    """A time or space step violates a stability/resolution bound."""


class AmplitudeTooSmall(TripodError, ValueError):
    """The field amplitude is too small for its phase to be well defined."""


class WidthMismatch(TripodError, ValueError):
    """The closed-form loss law needs equal retrieval widths."""


class QuadratureNonConvergent(TripodError, RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""


class GridTooCoarse(TripodError, ValueError):
    """Too much power sits near the edge of the transverse window."""


class ConfigError(TripodError, ValueError):
    """Malformed or invalid scenario configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
