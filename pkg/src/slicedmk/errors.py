"""Exception hierarchy for the sliced Monge-Kantorovich toolkit."""


class SlicedMKError(Exception):
    """Base class for every error raised by slicedmk."""

    pass


class InvalidDirectionError(SlicedMKError):
    """Raised when a projection direction is not a unit vector."""

    pass


class DimMismatchError(SlicedMKError):
    """Raised when two objects live in spaces of different dimension."""

    pass


class EmptyMeasureError(SlicedMKError):
    """Raised when a measure would have no atoms."""

    pass


class InvalidWeightsError(SlicedMKError):
    """Raised when weights are negative, non-finite, or do not sum to one."""

    pass


class InvalidExponentError(SlicedMKError):
    """Raised when a transport exponent is outside its admissible range."""

    pass


class InvalidQuantileError(SlicedMKError):
    """Raised when a quantile level lies outside (0, 1)."""

    pass


class InvalidParamError(SlicedMKError):
    """Raised for out-of-range scalar parameters (tau, theta, b, ...)."""

    pass


class EmptyGridError(SlicedMKError):
    """Raised when a grid function or transform domain is empty."""

    pass


class EmptySetError(SlicedMKError):
    """Raised when a direction set would contain no directions."""

    pass


class InvalidGridError(SlicedMKError):
    """Raised when a circle grid size is not a positive multiple of 8."""

    pass


class InvalidValueError(SlicedMKError):
    """Raised when an aggregate receives negative or non-finite values."""

    pass


class DegenerateInputError(SlicedMKError):
    """Raised when a construction is undefined for all-zero inputs."""

    pass


class HypothesisViolatedError(SlicedMKError):
    """Raised when a required hypothesis (such as p <= q) does not hold."""

    pass


class ShapeMismatchError(SlicedMKError):
    """Raised when a certificate does not match its measures or directions."""

    pass


class StepTooLargeError(SlicedMKError):
    """Raised when the barycenter objective keeps increasing."""

    pass


class UnsupportedOracleError(SlicedMKError):
    """Raised when the grid oracle is asked for an unsupported problem."""

    pass


class ResourceCapError(SlicedMKError):
    """Raised when an input exceeds a solver's size cap."""

    def __init__(self, cap: str, limit: int, actual: int):
        """Initialize with the cap that was exceeded.

        Args:
            cap: Name of the cap (e.g. 'assignment_points')
            limit: Maximum allowed size
            actual: Size that was requested
        """
        super().__init__(f"{cap} cap exceeded: {actual} > {limit}")
        self.cap = cap
        self.limit = limit
        self.actual = actual


class TooLargeError(ResourceCapError):
    """Raised when an exact solver is asked for more atoms than it accepts."""

    pass
