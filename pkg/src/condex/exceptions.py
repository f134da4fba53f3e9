"""Exception types shared across the package."""


class DegenerateDataError(ValueError):
    """Raised when input data is degenerate for the requested operation
    (all points identical, restricted sampling kernel with zero mass, ...)."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails beyond recovery
    (factorization failure after jitter escalation, singular system, ...)."""


class DivergenceError(RuntimeError):
    """Raised when solver iterates blow up.

    Carries the 1-based iteration index at which the guard tripped.
    """

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = int(iteration)


class ConfigError(ValueError):
    """Raised on invalid experiment configuration (unknown key, bad value)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
