"""Exception types shared across the package."""


class IntGarchError(Exception):
    """Base class for all intgarch errors."""


class EmptySeries(IntGarchError):
    pass


class InsufficientData(IntGarchError):
    pass


class DegenerateSeries(IntGarchError):
    pass


class UnsupportedOrder(IntGarchError):
    pass


class NotMeanStationary(IntGarchError):
    pass


class NotWeaklyStationary(IntGarchError):
    pass


class InvalidLag(IntGarchError):
    pass


class InvalidState(IntGarchError):
    pass


class ConfigError(IntGarchError):
    pass


class Diverged(IntGarchError):
    """Scale recursion exceeded the overflow guard; carries the step index."""

    def __init__(self, step: int, value: float):
        super().__init__(f"scale path diverged at step {step} (h={value:.6g})")
        self.step = step
        self.value = value


class NumericalFailure(IntGarchError):
    pass


class SingularHessian(IntGarchError):
    pass


class ParseError(IntGarchError):
    """Malformed input file; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BadBar(IntGarchError):
    """Price bar violating OHLC invariants; carries the row index when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class UsageError(IntGarchError):
    """Bad command-line flags (maps to exit code 64)."""
