"""Exception hierarchy shared by all tidalbelt modules."""


class TidalbeltError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(TidalbeltError):
    """A caller-supplied parameter is out of its documented range."""


class InvalidInputError(TidalbeltError):
    """Input data violates a structural requirement (NaNs, bad file format)."""


class InsufficientDataError(TidalbeltError):
    """Not enough observations to perform the requested computation."""


class DegenerateInputError(TidalbeltError):
    """Input is structurally valid but statistically degenerate (zero variance)."""


class SingularDesignError(TidalbeltError):
    """Regression design matrix is rank deficient or numerically singular."""


class MissingFeatureError(TidalbeltError):
    """A prediction was requested without all predictor values present."""


class DegenerateTrainingError(TidalbeltError):
    """Training data cannot support the model (single class, zero spread)."""


class InvalidLabelError(TidalbeltError):
    """A label does not belong to the declared class set."""


class FoldFailureError(TidalbeltError):
    """A cross-validation fold could not be trained."""
