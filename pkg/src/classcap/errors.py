"""Shared exception types."""


class DimensionError(ValueError):
    """Raised when array shapes or subspace dimensions are inconsistent."""


class TooFewClassesError(ValueError):
    """Raised when an operation needs more classes than the library holds."""


class OrthonormalityError(ValueError):
    """Raised when a frame is not column-orthonormal within tolerance."""


class PackingFileError(ValueError):
    """Malformed packing file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QuadratureError(RuntimeError):
    """Raised when the quadrature truncation tail cannot be driven below target."""
