"""tidalbelt: tidal-breathing analysis of respiration-belt waveforms.

Segments chest-belt force signals into breath cycles, extracts tidal
breathing features (fractional inspiratory time, normalized respiratory
rate, a tidal-volume surrogate), fits regressions mapping those features to
spirometric variables, and classifies airway obstruction and its severity.
"""

from .errors import (
    DegenerateInputError,
    DegenerateTrainingError,
    FoldFailureError,
    InsufficientDataError,
    InvalidInputError,
    InvalidLabelError,
    InvalidParameterError,
    MissingFeatureError,
    SingularDesignError,
    TidalbeltError,
)

__version__ = "0.1.0"

from .classify import (
    KnnModel,
    ObstructionLabel,
    SeverityStage,
    knn_fit,
    knn_predict,
    label_obstruction,
    severity_fit,
    severity_stage,
)
from .evaluation import ConfusionMatrix, MetricsReport, confusion, loocv, metrics
from .features import SubjectRecord, TidalFeatures, extract_features
from .respsignal import (
    BreathCycle,
    CleanRegion,
    RespiratorySignal,
    detrend,
    segment_breaths,
    select_clean_region,
)
from .stats import (
    CorrelationCell,
    RegressionModel,
    f_sf,
    ols_fit,
    ols_predict,
    p_from_f,
    p_from_r2,
    pearson,
    student_t_sf,
)
from .synthgen import BreathProfile, SyntheticCohort, generate_cohort, generate_signal

__all__ = [
    "__version__",
    "TidalbeltError",
    "InvalidParameterError",
    "InvalidInputError",
    "InsufficientDataError",
    "DegenerateInputError",
    "SingularDesignError",
    "MissingFeatureError",
    "DegenerateTrainingError",
    "InvalidLabelError",
    "FoldFailureError",
    "RespiratorySignal",
    "BreathCycle",
    "CleanRegion",
    "detrend",
    "segment_breaths",
    "select_clean_region",
    "SubjectRecord",
    "TidalFeatures",
    "extract_features",
    "CorrelationCell",
    "RegressionModel",
    "pearson",
    "ols_fit",
    "ols_predict",
    "p_from_r2",
    "p_from_f",
    "student_t_sf",
    "f_sf",
    "ObstructionLabel",
    "SeverityStage",
    "KnnModel",
    "label_obstruction",
    "knn_fit",
    "knn_predict",
    "severity_fit",
    "severity_stage",
    "ConfusionMatrix",
    "MetricsReport",
    "loocv",
    "confusion",
    "metrics",
    "BreathProfile",
    "SyntheticCohort",
    "generate_signal",
    "generate_cohort",
]
