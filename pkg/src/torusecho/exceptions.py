"""Exception types raised by the simulator and harness."""


class TorusEchoError(Exception):
    """Base class for all package errors."""


class TruncationError(TorusEchoError):
    """A Fourier window is too small for the requested operation.

    ``required_window`` carries a window size that would be large enough,
    when one can be estimated.
    """

    def __init__(self, message, required_window=None):
        super().__init__(message)
        self.required_window = required_window


class RegimeError(TorusEchoError):
    """The perturbation regime does not match the requested formula."""


class ConvergenceError(TorusEchoError):
    """Adaptive time-step refinement failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(TorusEchoError):
    """A scenario or component configuration is invalid."""
