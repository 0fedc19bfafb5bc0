from typing import Any


def _rebuild(cls: type["DomainError"], message: str, context: dict[str, Any]) -> "DomainError":
    return cls(message, **context)


class DomainError(Exception):
    """Raised when domain invariants are violated."""


class InvalidInputError(DomainError, ValueError):
    """Raised when an argument breaks a shape, range or finiteness contract."""


class ConvergenceError(DomainError):
    """Raised when a solve that must converge stopped at max_iter."""

    def __init__(self, message: str, *, lam: float, fit: object | None = None) -> None:
        super().__init__(message)
        self.lam = lam
        self.fit = fit

    def __reduce__(self):
        return _rebuild, (type(self), str(self), {"lam": self.lam, "fit": self.fit})


class UndefinedRatioError(DomainError, ValueError):
    """Raised when a ratio has a zero denominator."""


class DegenerateRangeError(DomainError, ValueError):
    """Raised when a trace has no spread to normalize over."""


class InitializationError(DomainError):
    """Raised when a tracker cannot be initialized from its burn-in block."""


class StreamError(DomainError):
    """Raised when a stream fails at a given time index."""

    def __init__(self, message: str, *, t: int) -> None:
        super().__init__(message)
        self.t = t

    # keyword-only context has to survive the trip back from a worker process
    def __reduce__(self):
        return _rebuild, (type(self), str(self), {"t": self.t})


class NodeError(DomainError):
    """Raised when the node-wise pipeline fails for one node."""

    def __init__(self, message: str, *, node: str) -> None:
        super().__init__(message)
        self.node = node

    def __reduce__(self):
        return _rebuild, (type(self), str(self), {"node": self.node})


class DataFormatError(DomainError, ValueError):
    """Raised when a delimited file cannot be read into a series."""

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None) -> None:
        super().__init__(message)
        self.row = row
        self.column = column

    def __reduce__(self):
        return _rebuild, (type(self), str(self), {"row": self.row, "column": self.column})


class ConfigError(DomainError, ValueError):
    """Raised when a run configuration is invalid."""
