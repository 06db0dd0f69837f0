"""Exception types shared across the package."""


class BogoError(Exception):
    """Base class for all package-specific errors."""


class InputError(BogoError, ValueError):
    """Rejected input: wrong shapes, failed invariants, malformed files."""


class CapacityError(BogoError):
    """A requested truncated space exceeds the dense-matrix capacity cap."""


class DegeneracyError(BogoError):
    """A matrix required to be well conditioned is numerically degenerate."""


class DomainError(BogoError, ValueError):
    """An operation was called outside its convergence/validity domain."""


class AccuracyError(BogoError):
    """A numerical routine could not meet its requested tolerance."""


class PreconditionError(BogoError):
    """An operation was called on a model that fails its precondition."""
