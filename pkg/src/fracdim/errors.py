"""Exception hierarchy shared by all fracdim modules."""


class FracdimError(Exception):
    """Base class for all errors raised by fracdim."""


class UnderResolutionError(FracdimError):
    """A sample is too coarse for the requested operation.

    Carries the sampling density that would be required for the call to
    succeed, so callers can regenerate instead of guessing.
    """

    def __init__(self, message, required_delta=None):
        super().__init__(message)
        self.required_delta = required_delta


class DensityContractError(UnderResolutionError):
    """Covering scale violates the r >= factor * delta density contract."""


class DimensionMismatchError(FracdimError):
    """Two samples with different ambient dimensions were combined."""


class ResourceLimitError(FracdimError):
    """Requested generation or enumeration exceeds the memory budget."""


class EmptyIntersectionError(FracdimError):
    """A local covering query found no sample points at any center."""
