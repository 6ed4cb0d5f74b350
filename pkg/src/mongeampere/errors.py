"""Exception types shared across the toolkit."""


class MongeAmpereError(Exception):
    """Base class for all toolkit errors."""


class InvalidConstraintError(MongeAmpereError):
    """A half-plane constraint is malformed (for example a zero normal)."""


class InvalidPolygonError(MongeAmpereError):
    """A vertex list does not describe a usable convex polygon."""


class OutsideDomainError(MongeAmpereError):
    """A query point lies outside the domain of definition."""


class UnboundedCellError(MongeAmpereError):
    """A subgradient cell is unbounded, typically from bad boundary sampling."""


class InfeasibleMassError(MongeAmpereError):
    """A target mass cannot be reached inside the admissible height bracket."""


class IncompatibleInputsError(MongeAmpereError):
    """Two nodal functions do not share domain, boundary data, and nodes."""


class UnsupportedInputError(MongeAmpereError):
    """The operation only accepts a restricted input class."""


class SingularTransformError(MongeAmpereError):
    """An affine change of variables has a singular matrix."""


class NotPositiveDefiniteError(MongeAmpereError):
    """A matrix expected to be positive definite is not."""


class UnsupportedDimensionError(MongeAmpereError):
    """The requested dimension is outside the supported range."""


class IntegrationFailureError(MongeAmpereError):
    """Adaptive ODE integration failed or left its domain of validity."""


class SingularPointError(MongeAmpereError):
    """Derivative evaluation was requested at a singular point."""


class InvalidSampleError(MongeAmpereError):
    """Power-law fitting received unusable samples."""
