"""Per-subject tidal breathing features from a clean region of breath cycles.

Three features summarize tidal breathing:

- fit: fractional inspiratory time, t_i / t_tot per cycle.  Dimensionless,
  strictly inside (0, 1).  One minus fit is the normalized expiratory time.
- rr: respiratory rate normalized by body-mass index, 60 / (bmi * t_tot).
  Units breaths/(minute * kg/m^2).
- tv: tidal-volume surrogate, belt amplitude scaled by BMI, ra * bmi.
  Arbitrary units (N * kg/m^2); proportional to volume, never calibrated
  to liters.

Each feature is computed per cycle and then averaged.  Averaging the
per-cycle ratios is deliberate: mean(t_i/t_tot) differs from
mean(t_i)/mean(t_tot) whenever cycle durations vary.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .errors import InsufficientDataError, InvalidInputError, InvalidParameterError
from .respsignal import BreathCycle, CleanRegion

DEFAULT_MIN_FEATURE_CYCLES = 6

# Tolerated relative disagreement between an explicit bmi value and the one
# recomputed from height and weight.
BMI_CONSISTENCY_RTOL = 0.005

FEV1_FVC_CONSISTENCY_ATOL = 0.01


def _bmi_from_anthropometrics(height_cm: float, weight_kg: float) -> float:
    return weight_kg / (height_cm / 100.0) ** 2


@dataclass(frozen=True)
class SubjectRecord:
    """Anthropometrics plus optional spirometric ground truth for one subject.

    ``bmi`` may be given directly or derived from height and weight; when
    both routes are available they must agree within 0.5%.  Spirometry
    fields are optional: fev1_l and fvc_l in liters, fev1_fvc as a ratio in
    (0, 1], fev1_pct_pred as percent of the predicted normal value (supplied
    externally, never computed here).
    """

    subject_id: str
    age_y: float | None = None
    height_cm: float | None = None
    weight_kg: float | None = None
    bmi: float | None = None
    fev1_l: float | None = None
    fvc_l: float | None = None
    fev1_fvc: float | None = None
    fev1_pct_pred: float | None = None

    def __post_init__(self):
        if self.height_cm is not None and not self.height_cm > 0:
            raise InvalidInputError("height_cm must be positive")
        if self.weight_kg is not None and not self.weight_kg > 0:
            raise InvalidInputError("weight_kg must be positive")
        derived = None
        if self.height_cm is not None and self.weight_kg is not None:
            derived = _bmi_from_anthropometrics(self.height_cm, self.weight_kg)
        if self.bmi is None:
            if derived is None:
                raise InvalidInputError(
                    f"subject {self.subject_id!r}: bmi missing and not derivable "
                    "from height/weight"
                )
            object.__setattr__(self, "bmi", derived)
        else:
            if not self.bmi > 0:
                raise InvalidInputError("bmi must be positive")
            if derived is not None:
                rel = abs(self.bmi - derived) / derived
                if rel > BMI_CONSISTENCY_RTOL:
                    raise InvalidInputError(
                        f"subject {self.subject_id!r}: bmi {self.bmi:.3f} disagrees "
                        f"with height/weight value {derived:.3f} by {rel:.1%}"
                    )
        for name in ("fev1_l", "fvc_l"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise InvalidInputError(f"{name} must be positive when present")
        if self.fev1_fvc is not None and not (0.0 < self.fev1_fvc <= 1.0):
            raise InvalidInputError("fev1_fvc must lie in (0, 1]")
        if (
            self.fev1_l is not None
            and self.fvc_l is not None
            and self.fev1_fvc is not None
        ):
            gap = abs(self.fev1_fvc - self.fev1_l / self.fvc_l)
            if gap >= FEV1_FVC_CONSISTENCY_ATOL:
                raise InvalidInputError(
                    f"subject {self.subject_id!r}: fev1_fvc {self.fev1_fvc:.3f} "
                    f"inconsistent with fev1/fvc "
                    f"{self.fev1_l / self.fvc_l:.3f}"
                )
        if self.fev1_pct_pred is not None and not (0.0 < self.fev1_pct_pred < 200.0):
            raise InvalidInputError("fev1_pct_pred must lie in (0, 200)")


@dataclass(frozen=True)
class TidalFeatures:
    """Averaged tidal breathing features for one subject."""

    fit: float
    rr: float
    tv: float
    n_cycles: int

    def __post_init__(self):
        if not (0.0 < self.fit < 1.0):
            raise InvalidInputError("fit must lie strictly in (0, 1)")
        if not self.rr > 0:
            raise InvalidInputError("rr must be positive")
        if not self.tv > 0:
            raise InvalidInputError("tv must be positive")
        if self.n_cycles < 1:
            raise InvalidInputError("n_cycles must be >= 1")

    def as_vector(self) -> tuple[float, float, float]:
        """Feature vector in the canonical (fit, rr, tv) order."""
        return (self.fit, self.rr, self.tv)


def fit_of_cycle(cycle: BreathCycle) -> float:
    """Fractional inspiratory time of one cycle: t_i / t_tot."""
    return cycle.t_i_s / cycle.t_tot_s


def rr_of_cycle(cycle: BreathCycle, bmi: float) -> float:
    """BMI-normalized respiratory rate of one cycle: 60 / (bmi * t_tot)."""
    if not bmi > 0:
        raise InvalidParameterError("bmi must be positive")
    return 60.0 / (bmi * cycle.t_tot_s)


def tv_of_cycle(cycle: BreathCycle, bmi: float) -> float:
    """Tidal-volume surrogate of one cycle: belt amplitude times BMI."""
    if not bmi > 0:
        raise InvalidParameterError("bmi must be positive")
    return cycle.ra_n * bmi


def extract_features(
    region: CleanRegion,
    subject: SubjectRecord,
    min_cycles: int = DEFAULT_MIN_FEATURE_CYCLES,
) -> TidalFeatures:
    """Average per-cycle features over a clean region.

    Raises an insufficient-data error when the region holds fewer than
    ``min_cycles`` cycles; pass a smaller ``min_cycles`` to accept short
    regions deliberately.
    """
    n = len(region.cycles)
    if min_cycles < 1:
        raise InvalidParameterError("min_cycles must be >= 1")
    if n < min_cycles:
        raise InsufficientDataError(
            f"region has {n} cycles but {min_cycles} are required"
        )
    bmi = subject.bmi
    return TidalFeatures(
        fit=fmean(fit_of_cycle(c) for c in region.cycles),
        rr=fmean(rr_of_cycle(c, bmi) for c in region.cycles),
        tv=fmean(tv_of_cycle(c, bmi) for c in region.cycles),
        n_cycles=n,
    )
