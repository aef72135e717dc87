"""Leave-one-out cross-validation, confusion matrices, and report metrics.

Conventions that matter when comparing against published tables:

- "balanced_accuracy" is (sensitivity + specificity) / 2.  Reports that
  label this simply "accuracy" are reproducible only under this reading;
  the raw hit rate is emitted separately as "raw_accuracy".
- A metric whose denominator is zero (no predictions of a class, no true
  members of a class) is reported as undefined (None) and listed in
  ``undefined_metrics``, never silently coerced to 0 or NaN.
- Cohen's kappa uses marginal-product expected agreement.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    FoldFailureError,
    InsufficientDataError,
    InvalidInputError,
    InvalidLabelError,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square confusion matrix; counts[i][j] = true class i, predicted j."""

    classes: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    positive_class: str | None = None

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        if len(classes) < 2 or len(set(classes)) != len(classes):
            raise InvalidInputError("classes must be >= 2 unique names")
        counts = tuple(tuple(int(v) for v in row) for row in self.counts)
        if len(counts) != len(classes) or any(
            len(row) != len(classes) for row in counts
        ):
            raise InvalidInputError("counts must be square over classes")
        if any(v < 0 for row in counts for v in row):
            raise InvalidInputError("counts must be non-negative")
        if sum(v for row in counts for v in row) == 0:
            raise InvalidInputError("confusion matrix must hold at least one pair")
        if self.positive_class is not None and self.positive_class not in classes:
            raise InvalidLabelError(
                f"positive class {self.positive_class!r} not among classes"
            )
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return sum(v for row in self.counts for v in row)

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def col_sum(self, j: int) -> int:
        return sum(row[j] for row in self.counts)


@dataclass(frozen=True)
class MetricsReport:
    """All metrics for one confusion matrix; None marks an undefined value."""

    sensitivity: float | None
    specificity: float | None
    balanced_accuracy: float | None
    f1: float | None
    precision: float | None
    raw_accuracy: float
    kappa: float | None
    per_class: dict[str, dict[str, float | None]] = field(default_factory=dict)
    undefined_metrics: tuple[str, ...] = ()

    def __post_init__(self):
        for name in (
            "sensitivity",
            "specificity",
            "balanced_accuracy",
            "f1",
            "precision",
            "raw_accuracy",
        ):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name} must lie in [0, 1]")
        if self.kappa is not None and not (-1.0 <= self.kappa <= 1.0):
            raise InvalidInputError("kappa must lie in [-1, 1]")

    def to_dict(self) -> dict:
        return {
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "balanced_accuracy": self.balanced_accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "raw_accuracy": self.raw_accuracy,
        }


def loocv(
    dataset: Sequence[tuple[Any, Any]],
    trainer: Callable[[list[tuple[Any, Any]]], Any],
    predictor: Callable[[Any, Any], Any],
) -> list[tuple[Any, Any]]:
    """Leave-one-out cross-validation over (sample, label) pairs.

    For each index i a model is trained on every pair except i and asked to
    predict sample i.  Output order matches dataset order.  A trainer that
    raises on some fold aborts the whole run with a fold-failure error
    naming the held-out index.
    """
    data = list(dataset)
    n = len(data)
    if n < 2:
        raise InsufficientDataError("leave-one-out needs at least 2 samples")
    out: list[tuple[Any, Any]] = []
    for i in range(n):
        train = data[:i] + data[i + 1 :]
        try:
            model = trainer(train)
        except Exception as exc:
            raise FoldFailureError(
                f"training failed with sample {i} held out: {exc}"
            ) from exc
        x_i, true_i = data[i]
        out.append((true_i, predictor(model, x_i)))
    return out


def confusion(
    pairs: Sequence[tuple[Any, Any]],
    classes: Sequence[str],
    positive_class: str | None = None,
) -> ConfusionMatrix:
    """Tally (true, predicted) pairs into a confusion matrix.

    Labels may be strings or enum members with a ``.value`` string; both
    sides must appear in ``classes``.
    """
    names = [str(c) for c in classes]
    index = {c: i for i, c in enumerate(names)}
    counts = [[0] * len(names) for _ in names]
    for true, pred in pairs:
        t = getattr(true, "value", true)
        p = getattr(pred, "value", pred)
        if t not in index:
            raise InvalidLabelError(f"true label {t!r} not among classes {names}")
        if p not in index:
            raise InvalidLabelError(f"predicted label {p!r} not among classes {names}")
        counts[index[t]][index[p]] += 1
    return ConfusionMatrix(
        classes=tuple(names),
        counts=tuple(tuple(row) for row in counts),
        positive_class=positive_class,
    )


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def cohen_kappa(cm: ConfusionMatrix) -> float | None:
    """Cohen's kappa; None when expected agreement is 1 (formula is 0/0)."""
    total = cm.total
    p_o = sum(cm.counts[i][i] for i in range(len(cm.classes))) / total
    p_e = sum(
        cm.row_sum(i) * cm.col_sum(i) for i in range(len(cm.classes))
    ) / (total * total)
    if 1.0 - p_e <= 1e-15:
        return None
    return (p_o - p_e) / (1.0 - p_e)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Compute the full metric set for a confusion matrix.

    Binary metrics (sensitivity, specificity, precision, F1, balanced
    accuracy) require a 2-class matrix with ``positive_class`` set; on other
    matrices they are None without being listed as undefined.  Per-class
    precision and recall are always computed.
    """
    undefined: list[str] = []
    per_class: dict[str, dict[str, float | None]] = {}
    for i, name in enumerate(cm.classes):
        prec = _ratio(cm.counts[i][i], cm.col_sum(i))
        rec = _ratio(cm.counts[i][i], cm.row_sum(i))
        if prec is None:
            undefined.append(f"precision[{name}]")
        if rec is None:
            undefined.append(f"recall[{name}]")
        per_class[name] = {"precision": prec, "recall": rec}

    sensitivity = specificity = balanced = f1 = precision = None
    if cm.positive_class is not None and len(cm.classes) == 2:
        pos = cm.classes.index(cm.positive_class)
        neg = 1 - pos
        tp = cm.counts[pos][pos]
        fn = cm.counts[pos][neg]
        fp = cm.counts[neg][pos]
        tn = cm.counts[neg][neg]
        sensitivity = _ratio(tp, tp + fn)
        specificity = _ratio(tn, tn + fp)
        precision = _ratio(tp, tp + fp)
        if sensitivity is None:
            undefined.append("sensitivity")
        if specificity is None:
            undefined.append("specificity")
        if precision is None:
            undefined.append("precision")
        if sensitivity is not None and specificity is not None:
            balanced = (sensitivity + specificity) / 2.0
        else:
            undefined.append("balanced_accuracy")
        if (
            precision is not None
            and sensitivity is not None
            and precision + sensitivity > 0
        ):
            f1 = 2.0 * precision * sensitivity / (precision + sensitivity)
        else:
            undefined.append("f1")

    kappa = cohen_kappa(cm)
    if kappa is None:
        undefined.append("kappa")
    raw_accuracy = sum(cm.counts[i][i] for i in range(len(cm.classes))) / cm.total
    return MetricsReport(
        sensitivity=sensitivity,
        specificity=specificity,
        balanced_accuracy=balanced,
        f1=f1,
        precision=precision,
        raw_accuracy=raw_accuracy,
        kappa=kappa,
        per_class=per_class,
        undefined_metrics=tuple(undefined),
    )


def report_to_dict(task: str, cm: ConfusionMatrix, rep: MetricsReport) -> dict:
    """Assemble the evaluation report document for serialization."""
    return {
        "task": task,
        "n": cm.total,
        "classes": list(cm.classes),
        "confusion": [list(row) for row in cm.counts],
        "metrics": rep.to_dict(),
        "per_class": {
            name: dict(vals) for name, vals in rep.per_class.items()
        },
        "kappa": rep.kappa,
        "undefined_metrics": list(rep.undefined_metrics),
    }
