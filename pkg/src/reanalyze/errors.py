"""Exception types shared across the package."""


class ReanalysisError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(ReanalysisError):
    """A generator or operation received an out-of-range parameter."""


class DegenerateElementError(ReanalysisError):
    """Element geometry is degenerate (zero or negative length)."""


class InvalidMaterialError(ReanalysisError):
    """Material data produces a non-physical stiffness."""


class InvalidStateError(ReanalysisError):
    """Internal state violates a solver precondition (e.g. tangent <= 0)."""


class UnstableStructureError(ReanalysisError):
    """Assembled stiffness matrix is singular."""


class NotDeterminateError(ReanalysisError):
    """Basis parameter count does not match the number of free DOFs."""


class BasisUnstableError(ReanalysisError):
    """Basis mode matrix is square but numerically singular."""


class UnsupportedModelError(ReanalysisError):
    """Operation requires a generator-built model."""


class InvalidMeasurementError(ReanalysisError):
    """Timing ratio requested with a non-positive reference time."""


class InternalError(ReanalysisError):
    """An invariant that should hold by construction was violated."""
