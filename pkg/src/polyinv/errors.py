"""Typed errors shared across the package.

Degenerate inputs raise; no sentinel sets are returned anywhere.
"""


class PolyinvError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(PolyinvError, ValueError):
    """Operands disagree on ambient dimension."""


class DegenerateHalfspaceError(PolyinvError, ValueError):
    """Halfspace normal has norm below the degeneracy tolerance."""


class EmptyPolytopeError(PolyinvError):
    """Operation requires a nonempty polytope."""


class UnboundedPolytopeError(PolyinvError):
    """Operation requires a bounded polytope."""


class LpNumericalError(PolyinvError):
    """Simplex exceeded its iteration cap (numerical failure)."""


class NonConvergenceError(PolyinvError):
    """Fixed-point recursion hit its iteration cap before converging."""


class InsufficientExcitationError(PolyinvError):
    """Trajectory archive cannot supply a full-rank regressor window."""


class ResidualTooLargeError(PolyinvError):
    """Regression residual exceeds the noiseless-dynamics tolerance."""


class FailureNotExcludedError(PolyinvError):
    """A learned halfspace failed to exclude its source failure pair."""


class EmptySectionError(PolyinvError):
    """Admissible-input section is empty at the queried state."""


class ControllerInfeasibleError(PolyinvError):
    """Controller had no admissible input at a visited state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ConfigError(PolyinvError, ValueError):
    """Experiment configuration is missing or malformed."""
