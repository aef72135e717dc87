"""Obstruction detection (KNN) and severity staging (regression + GOLD cuts).

Two classifiers:

- A k-nearest-neighbour detector over (fit, rr, tv) feature vectors, binary
  Normal vs Obstructed.  Features are z-score scaled before the Euclidean
  distance by default; tv is an order of magnitude larger than the other
  two features, so raw distances would reduce to a tv threshold.
- An ordinal severity stager: an OLS model estimates %predicted FEV1 from
  the same three features, and the estimate is cut into four stages at
  80 / 50 / 30 percent.  Boundary values belong to the less severe stage.

Ground-truth obstruction labels come from the spirometric ratio: values
below 0.70 are Obstructed, 0.70 itself is Normal.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateTrainingError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
)
from .features import TidalFeatures
from .stats import RegressionModel, ols_fit

OBSTRUCTION_RATIO_THRESHOLD = 0.70

DEFAULT_K = 3

KNN_SCALINGS = ("zscore", "raw")

FEATURE_NAMES = ("fit", "rr", "tv")


class ObstructionLabel(Enum):
    NORMAL = "Normal"
    OBSTRUCTED = "Obstructed"


class CoarseStage(Enum):
    MILD_MODERATE = "MildModerate"
    SEVERE_VERY_SEVERE = "SevereVerySevere"


class SeverityStage(Enum):
    MILD = "Mild"
    MODERATE = "Moderate"
    SEVERE = "Severe"
    VERY_SEVERE = "VerySevere"

    @property
    def coarse(self) -> CoarseStage:
        if self in (SeverityStage.MILD, SeverityStage.MODERATE):
            return CoarseStage.MILD_MODERATE
        return CoarseStage.SEVERE_VERY_SEVERE


# (lower bound in %predicted FEV1, stage); evaluated top down, first
# satisfied bound wins, anything below the last bound is VerySevere.
GOLD_STAGE_THRESHOLDS: tuple[tuple[float, SeverityStage], ...] = (
    (80.0, SeverityStage.MILD),
    (50.0, SeverityStage.MODERATE),
    (30.0, SeverityStage.SEVERE),
)

PCT_PRED_CLAMP = (0.0, 200.0)


def label_obstruction(fev1_fvc: float) -> ObstructionLabel:
    """Ground-truth obstruction label from the FEV1/FVC ratio.

    Obstructed iff the ratio is strictly below 0.70; the boundary value is
    Normal (obstruction is defined by ratio < 0.70, so 0.70 is not below).
    """
    if not (0.0 < fev1_fvc <= 1.5):
        raise InvalidParameterError(
            f"fev1_fvc must lie in (0, 1.5], got {fev1_fvc!r}"
        )
    if fev1_fvc < OBSTRUCTION_RATIO_THRESHOLD:
        return ObstructionLabel.OBSTRUCTED
    return ObstructionLabel.NORMAL


@dataclass(frozen=True)
class KnnModel:
    """Fitted KNN obstruction detector.

    Stores the raw training feature vectors with their labels plus the
    per-feature scaler (mean, std) applied before distance computation.
    A raw-distance model is represented by the identity scaler.
    """

    k: int
    feature_means: tuple[float, float, float]
    feature_stds: tuple[float, float, float]
    points: tuple[tuple[float, float, float, ObstructionLabel], ...]

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise InvalidParameterError("k must be a positive odd count")
        if self.k > len(self.points):
            raise InvalidParameterError(
                f"k={self.k} exceeds training size {len(self.points)}"
            )
        if len(self.feature_means) != 3 or len(self.feature_stds) != 3:
            raise InvalidInputError("scaler must cover exactly 3 features")
        if not all(s > 0 for s in self.feature_stds):
            raise DegenerateTrainingError("scaler stddevs must all be positive")
        labels = {p[3] for p in self.points}
        if len(labels) < 2:
            raise DegenerateTrainingError("training data holds a single class")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "scaler": {
                "means": list(self.feature_means),
                "stds": list(self.feature_stds),
            },
            "points": [
                {"fit": f, "rr": r, "tv": t, "label": lab.value}
                for f, r, t, lab in self.points
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "KnnModel":
        try:
            return cls(
                k=int(doc["k"]),
                feature_means=tuple(float(v) for v in doc["scaler"]["means"]),
                feature_stds=tuple(float(v) for v in doc["scaler"]["stds"]),
                points=tuple(
                    (
                        float(p["fit"]),
                        float(p["rr"]),
                        float(p["tv"]),
                        ObstructionLabel(p["label"]),
                    )
                    for p in doc["points"]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed KNN document: {exc}") from exc


def _feature_triple(features) -> tuple[float, float, float]:
    if isinstance(features, TidalFeatures):
        return features.as_vector()
    triple = tuple(float(v) for v in features)
    if len(triple) != 3:
        raise InvalidInputError("expected a (fit, rr, tv) triple")
    return triple


def knn_fit(
    data: list[tuple[TidalFeatures, ObstructionLabel]],
    k: int = DEFAULT_K,
    scaling: str = "zscore",
) -> KnnModel:
    """Fit the KNN obstruction detector.

    ``scaling`` is "zscore" (default) or "raw"; raw mode skips
    normalization and is only useful for sensitivity analysis.
    """
    if scaling not in KNN_SCALINGS:
        raise InvalidParameterError(f"scaling must be one of {KNN_SCALINGS}")
    if k < 1 or k % 2 == 0:
        raise InvalidParameterError("k must be a positive odd count")
    if len(data) < k:
        raise InsufficientDataError(
            f"need at least k={k} training points, got {len(data)}"
        )
    vectors = np.array([_feature_triple(f) for f, _ in data], dtype=np.float64)
    labels = [lab for _, lab in data]
    if len(set(labels)) < 2:
        raise DegenerateTrainingError("training data holds a single class")
    if scaling == "zscore":
        means = vectors.mean(axis=0)
        stds = vectors.std(axis=0)
        # identical values can leave a std around 1e-17 through summation
        # rounding, so constancy is checked on the column values directly
        constant = (vectors == vectors[0]).all(axis=0)
        if not (stds > 0).all() or constant.any():
            flat = [
                FEATURE_NAMES[i]
                for i in range(3)
                if stds[i] <= 0 or constant[i]
            ]
            raise DegenerateTrainingError(
                f"zero variance in training feature(s): {', '.join(flat)}"
            )
    else:
        means = np.zeros(3)
        stds = np.ones(3)
    return KnnModel(
        k=k,
        feature_means=tuple(float(m) for m in means),
        feature_stds=tuple(float(s) for s in stds),
        points=tuple(
            (float(v[0]), float(v[1]), float(v[2]), lab)
            for v, lab in zip(vectors, labels)
        ),
    )


def knn_predict(model: KnnModel, features) -> ObstructionLabel:
    """Majority vote among the k nearest training points.

    Distances are Euclidean in scaled feature space.  Equal distances are
    broken by lower training index, so prediction is deterministic.
    """
    query = np.array(_feature_triple(features), dtype=np.float64)
    means = np.array(model.feature_means)
    stds = np.array(model.feature_stds)
    train = np.array([p[:3] for p in model.points], dtype=np.float64)
    diffs = (train - means) / stds - (query - means) / stds
    dists = np.sqrt((diffs * diffs).sum(axis=1))
    order = np.argsort(dists, kind="stable")
    votes = Counter(model.points[i][3] for i in order[: model.k])
    # Binary vote with odd k always has a strict winner.
    return votes.most_common(1)[0][0]


def severity_fit(
    data: list[tuple[TidalFeatures, float]],
    rmse_denominator: str = "n",
) -> RegressionModel:
    """Fit the %predicted-FEV1 regression on (fit, rr, tv)."""
    if len(data) < 5:
        raise InsufficientDataError(
            f"need at least 5 observations for 3 predictors, got {len(data)}"
        )
    X = [_feature_triple(f) for f, _ in data]
    y = [float(p) for _, p in data]
    return ols_fit(
        X,
        y,
        names=list(FEATURE_NAMES),
        model_name="fev1_pct_pred",
        rmse_denominator=rmse_denominator,
    )


def severity_stage(
    pct_pred_fev1: float,
    thresholds: tuple[tuple[float, SeverityStage], ...] = GOLD_STAGE_THRESHOLDS,
) -> SeverityStage:
    """Stage severity from %predicted FEV1 with boundary-inclusive cuts.

    The input is clamped to [0, 200] first: regression estimates can land
    outside the physiologic range and still deserve a stage.
    """
    p = float(pct_pred_fev1)
    if not np.isfinite(p):
        raise InvalidParameterError("pct_pred_fev1 must be finite")
    p = min(max(p, PCT_PRED_CLAMP[0]), PCT_PRED_CLAMP[1])
    for bound, stage in thresholds:
        if p >= bound:
            return stage
    return SeverityStage.VERY_SEVERE
