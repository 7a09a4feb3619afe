"""Exception hierarchy shared by every module of the package."""


class CondShapError(Exception):
    """Base class for all package errors."""


class CapacityError(CondShapError):
    """Requested feature count exceeds what exact enumeration allows."""


class ShapeError(CondShapError, ValueError):
    """Array dimensions do not agree."""


class ParameterError(CondShapError, ValueError):
    """A numeric parameter is outside its admissible range."""


class InputError(CondShapError, ValueError):
    """Input data contains non-finite values or is otherwise unusable."""


class NotSPDError(CondShapError):
    """A covariance matrix is not symmetric positive definite."""


class SingularSystemError(CondShapError):
    """A least-squares system cannot be solved."""


class ConditioningError(CondShapError):
    """The observed block of a covariance matrix is singular."""

    def __init__(self, message, mask=None):
        super().__init__(message)
        self.mask = mask


class DataError(CondShapError):
    """A dataset is empty or malformed."""


class FitError(CondShapError):
    """Fitting a per-coalition regression failed."""

    def __init__(self, message, mask=None):
        super().__init__(message)
        self.mask = mask


class MissingCoalitionError(CondShapError):
    """A contribution table lacks entries for some coalitions."""

    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(str(m) for m in self.missing[:16])
        more = "" if len(self.missing) <= 16 else f" (+{len(self.missing) - 16} more)"
        super().__init__(f"contribution table missing masks: {shown}{more}")


class ConsistencyError(CondShapError):
    """An estimator was queried for something it was never fitted on."""


class AlignmentError(CondShapError):
    """Explanation sets do not cover the same observations."""


class ConfigError(CondShapError):
    """Experiment configuration is invalid."""


class PipelineError(CondShapError):
    """A benchmark stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


class EstimationError(CondShapError):
    """An estimator failed while filling a contribution table."""

    def __init__(self, obs_id, mask, cause):
        self.obs_id = obs_id
        self.mask = mask
        self.cause = cause
        where = f"observation {obs_id}" + ("" if mask is None else f", coalition mask {mask}")
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
