"""Exception and warning types shared across the toolkit."""


class QigkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(QigkitError):
    """Operands live on configuration spaces of different size."""


class NormalizationError(QigkitError):
    """A state that must be unit-norm is not."""


class NodalPointError(QigkitError):
    """An amplitude or density hit the nodal floor where division is required."""


class MeasureMismatchError(QigkitError):
    """A density does not integrate to one against the space's weights."""


class BoundaryError(QigkitError):
    """A finite-difference stencil left the available parameter grid."""


class NotAnSldError(QigkitError):
    """Operator fails the SLD contracts (self-adjointness or zero expectation)."""


class NonSingleValuedDensityError(QigkitError):
    """Loop integral of the osmotic part does not close (Im part too large)."""


class RefinementNeededError(QigkitError):
    """Loop edges are too coarse to track the phase unambiguously."""


class WiringError(QigkitError):
    """Objects from unrelated spaces or measure changes were combined."""


class UnwrapAmbiguityWarning(UserWarning):
    """A phase jump between adjacent samples came close to the branch cut."""
