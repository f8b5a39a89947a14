"""Exception types shared across the package."""


class PeflocError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(PeflocError):
    """Mismatched or invalid array shapes."""


class InsufficientDataError(PeflocError):
    """The sample is too short for the requested computation."""


class DegenerateDataError(PeflocError):
    """The data is degenerate (e.g. an all-zero season)."""


class SingularSystemError(PeflocError):
    """A linear system arising from the measures is singular or ill-conditioned."""


class NonCausalModelError(PeflocError):
    """The periodic AR part is not causal; simulation is refused."""


class EstimationError(PeflocError):
    """A statistical estimation procedure failed on the given input."""


class IngestionError(PeflocError):
    """A data file could not be parsed into a periodic series."""
