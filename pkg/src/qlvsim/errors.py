"""Exception types shared across the package."""


class QlvError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QlvError, ValueError):
    """An input violates a documented precondition or parameter invariant."""


class StabilityError(QlvError, ValueError):
    """A stiffness/flexibility matrix failed the principal-minor screening.

    ``minor_index`` is the 1-based order of the first non-positive leading
    principal minor.
    """

    def __init__(self, message: str, minor_index: int | None = None):
        super().__init__(message)
        self.minor_index = minor_index


class NumericalError(QlvError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class FitError(QlvError, ValueError):
    """A parameter-identification problem is degenerate or under-determined."""


class ConfigError(QlvError, ValueError):
    """Configuration validation failed; ``errors`` lists every violation."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)
