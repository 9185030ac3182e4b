"""Exception types raised across the package."""


class LiquidSkinError(Exception):
    """Base class for all package-specific errors."""


class DomainError(LiquidSkinError, ValueError):
    """An argument is outside the physically meaningful domain."""


class InfeasiblePackingError(LiquidSkinError):
    """Rejection sampling could not place a point at the requested separation."""


class DegenerateInputError(LiquidSkinError):
    """Triangulation input has fewer than 3 points or is collinear."""


class SingularSystemError(LiquidSkinError):
    """The nodal system has no unique solution (e.g. disconnected electrodes)."""


class InsufficientBaselineError(LiquidSkinError):
    """Quiescent windows contain too few samples to fit a baseline."""


class InsufficientDataError(LiquidSkinError):
    """A time series is too short for the requested analysis."""


class UnclassifiableEventError(LiquidSkinError):
    """An event signature matches none of the four response families."""

    def __init__(self, delta_r: float, delta_x: float, message: str | None = None):
        self.delta_r = delta_r
        self.delta_x = delta_x
        super().__init__(
            message
            or f"event signature (dR={delta_r:+.4g}, dX={delta_x:+.4g}) matches no family"
        )


class ProtocolWindowError(LiquidSkinError):
    """A multi-touch phase is too short to contain a steady measurement window."""


class CalibrationInfeasibleError(LiquidSkinError):
    """Calibration exhausted its budget above the requested tolerance."""

    def __init__(self, best_residual: float, message: str | None = None):
        self.best_residual = best_residual
        super().__init__(
            message or f"calibration infeasible; best max residual {best_residual:.4g} Ohm"
        )


class SchemaError(LiquidSkinError):
    """A persisted document violates its schema."""
