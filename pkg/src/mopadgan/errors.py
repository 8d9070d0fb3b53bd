"""Exception types shared across the package."""


class MoPadGanError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(MoPadGanError):
    """Cholesky failed at every step of the jitter ladder."""


class DimensionMismatch(MoPadGanError, ValueError):
    pass


class TraceMismatch(MoPadGanError, ValueError):
    """Backward pass given a trace that does not belong to these parameters."""


class SingularInput(MoPadGanError, ValueError):
    """Objective evaluated on its singular locus (KNO1 at x1 + x2 = 0)."""


class EmptySet(MoPadGanError, ValueError):
    pass


class EstimatorFailure(MoPadGanError):
    """The performance estimator raised or returned non-finite values."""


class TrainingDiverged(MoPadGanError):
    """Too many consecutive batches produced a degenerate DPP kernel."""


class DegenerateTargets(UserWarning):
    """GP targets have zero variance; a constant-mean model was returned."""
