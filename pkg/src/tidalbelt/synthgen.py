"""Deterministic synthetic belt signals and cohorts with stored ground truth.

Breath shape
------------
Each synthetic breath is a raised cosine: force rises 0 -> ra over the
inspiratory span and falls ra -> 0 over the expiratory span, with zero slope
at every phase boundary.  The C1 joins avoid spurious extrema, and cycle
boundaries land on exact integer sample indices, so the returned ground
truth is exact rather than rounded.  A short descending lead-in before the
first trough and a rising tail after the last one make the edge troughs
detectable; drift and artifact bursts perturb the samples but never the
returned cycle list.

Randomness
----------
All draws come from numpy's Philox counter-based generator (Philox 4x64
with 10 rounds), keyed directly by the caller's seed.  The stream is
specified independently of platform defaults, so identical seeds give
bit-identical output everywhere.  Draw order is part of the contract:
regenerating with the same seed must reproduce stored ground truth.

Cohort regimes
--------------
Two parameter regimes mimic the qualitative picture of obstructed
breathing: obstructed subjects get a lower fractional inspiratory time
(prolonged exhale), shorter cycles (faster breathing), and smaller belt
amplitude (reduced tidal volume).  The numeric ranges are invented test
fixtures, tuned for class separation rather than clinical fidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classify import ObstructionLabel, label_obstruction
from .errors import InvalidParameterError
from .features import SubjectRecord, TidalFeatures
from .respsignal import BreathCycle, RespiratorySignal
from .stats import RegressionModel, p_from_f, pearson

DEFAULT_DURATION_S = 60.0
DEFAULT_SAMPLE_RATE_HZ = 25.0
DEFAULT_JITTER = 0.04
DEFAULT_NOISE_SD = 6.0

# Lead-in starts this far (x ra) above the first trough; the tail rises to
# half ra.  Both exceed any sane prominence threshold.
LEAD_IN_FRACTION = 0.3
TAIL_FRACTION = 0.5

ARTIFACT_FREQ_HZ = 7.0

# Deterministic part of the severity synthesis: %predicted FEV1 as a linear
# function of (fit, rr, tv).  Invented fixture, chosen so the two regimes
# span the staging range.
SEVERITY_INTERCEPT = -25.0
SEVERITY_COEFFS = (("fit", 280.0), ("rr", -12.0), ("tv", 0.15))

_NORMAL_REGIME = {
    "fit": (0.40, 0.04, 0.34, 0.46),
    "t_tot": (3.8, 0.25, 3.0, 4.6),
    "ra": (1.6, 0.20, 1.2, 2.2),
}
_OBSTRUCTED_REGIME = {
    "fit": (0.30, 0.05, 0.22, 0.36),
    "t_tot": (2.6, 0.20, 2.0, 3.2),
    "ra": (0.8, 0.15, 0.5, 1.1),
}


def _philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass(frozen=True)
class BreathProfile:
    """Parameters of one subject's synthetic breathing pattern."""

    t_i_s: float
    t_tot_s: float
    ra_n: float
    jitter: float = 0.0
    drift_slope_n_per_s: float = 0.0
    artifact_bursts: tuple[tuple[float, float, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.t_i_s < self.t_tot_s):
            raise InvalidParameterError("need 0 < t_i_s < t_tot_s")
        if not self.ra_n > 0:
            raise InvalidParameterError("ra_n must be positive")
        if self.jitter < 0:
            raise InvalidParameterError("jitter must be >= 0")
        object.__setattr__(
            self,
            "artifact_bursts",
            tuple(
                (float(s), float(d), float(a)) for s, d, a in self.artifact_bursts
            ),
        )


def _raised_cosine_cycle(out: np.ndarray, start: int, n_i: int, n_tot: int, ra: float):
    j_up = np.arange(n_i + 1)
    out[start : start + n_i + 1] = ra * 0.5 * (1.0 - np.cos(np.pi * j_up / n_i))
    n_ex = n_tot - n_i
    j_dn = np.arange(n_ex + 1)
    out[start + n_i : start + n_tot + 1] = (
        ra * 0.5 * (1.0 + np.cos(np.pi * j_dn / n_ex))
    )


def generate_signal(
    profile: BreathProfile,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
    subject_id: str = "",
) -> tuple[RespiratorySignal, list[BreathCycle]]:
    """Emit a synthetic signal and the exact cycles it contains.

    The per-cycle parameters are the profile values times (1 + jitter * z)
    with z drawn per cycle, then snapped to integer sample counts; the
    returned BreathCycle list reports the snapped values, which are exact.
    """
    if duration_s < 2.0 * profile.t_tot_s:
        raise InvalidParameterError(
            "duration_s must cover at least two nominal cycles"
        )
    if sample_rate_hz < 10.0 / profile.t_tot_s:
        raise InvalidParameterError(
            "sample_rate_hz too low: need at least 10 samples per cycle"
        )
    fs = float(sample_rate_hz)
    n = int(round(duration_s * fs))
    rng = _philox(profile.seed)
    x = np.zeros(n)

    nominal_fit = profile.t_i_s / profile.t_tot_s
    lead_n = max(2, int(round(0.5 * profile.t_tot_s * fs)))
    tail_reserve = max(3, int(round(0.25 * profile.t_tot_s * fs)))

    cycles_raw: list[tuple[int, int, int, float]] = []
    start = lead_n
    while True:
        z_t = rng.standard_normal()
        z_f = rng.standard_normal()
        z_r = rng.standard_normal()
        t_tot_c = profile.t_tot_s * (1.0 + profile.jitter * z_t)
        fit_c = min(0.95, max(0.05, nominal_fit * (1.0 + profile.jitter * z_f)))
        ra_c = max(0.05 * profile.ra_n, profile.ra_n * (1.0 + profile.jitter * z_r))
        n_tot = max(4, int(round(t_tot_c * fs)))
        n_i = min(n_tot - 1, max(1, int(round(fit_c * n_tot))))
        if start + n_tot > n - 1 - tail_reserve:
            break
        _raised_cosine_cycle(x, start, n_i, n_tot, ra_c)
        cycles_raw.append((start, start + n_i, start + n_tot, ra_c))
        start += n_tot

    if not cycles_raw:
        raise InvalidParameterError(
            "duration too short to fit a complete cycle with its margins"
        )

    # Lead-in: half-cosine descent into the first trough.
    j = np.arange(lead_n + 1)
    x[: lead_n + 1] = (
        LEAD_IN_FRACTION * profile.ra_n * 0.5 * (1.0 + np.cos(np.pi * j / lead_n))
    )
    # Tail: half-cosine rise away from the last trough.
    last = cycles_raw[-1][2]
    n_tail = n - 1 - last
    if n_tail >= 1:
        j = np.arange(n_tail + 1)
        x[last:] = (
            TAIL_FRACTION * profile.ra_n * 0.5 * (1.0 - np.cos(np.pi * j / n_tail))
        )

    if profile.drift_slope_n_per_s != 0.0:
        x = x + profile.drift_slope_n_per_s * (np.arange(n) / fs)
    for burst_start, burst_dur, burst_amp in profile.artifact_bursts:
        i0 = max(0, int(round(burst_start * fs)))
        i1 = min(n, i0 + int(round(burst_dur * fs)))
        if i1 - i0 < 2:
            continue
        t_rel = (np.arange(i1 - i0)) / fs
        window = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(i1 - i0) / (i1 - i0 - 1)))
        x[i0:i1] += burst_amp * window * np.sin(2.0 * np.pi * ARTIFACT_FREQ_HZ * t_rel)

    signal = RespiratorySignal(x, fs, subject_id)
    # Ground truth reports the drawn parameters, untouched by drift or
    # artifact perturbations of the samples.
    cycles = [
        BreathCycle(
            trough_idx=s,
            peak_idx=p,
            end_trough_idx=e,
            t_i_s=(p - s) / fs,
            t_tot_s=(e - s) / fs,
            ra_n=ra_c,
        )
        for s, p, e, ra_c in cycles_raw
    ]
    return signal, cycles


@dataclass(frozen=True)
class SyntheticSubject:
    """One cohort member: record, signal recipe, and feature ground truth."""

    record: SubjectRecord
    profile: BreathProfile
    features: TidalFeatures

    @property
    def label(self) -> ObstructionLabel:
        return label_obstruction(self.record.fev1_fvc)


@dataclass(frozen=True)
class SyntheticCohort:
    """A generated cohort with everything needed for oracle checks."""

    subjects: tuple[SyntheticSubject, ...]
    generating_model: RegressionModel
    noise_sd: float
    duration_s: float
    sample_rate_hz: float

    def signal_for(self, index: int) -> tuple[RespiratorySignal, list[BreathCycle]]:
        """Regenerate subject ``index``'s signal; deterministic per seed."""
        subj = self.subjects[index]
        return generate_signal(
            subj.profile,
            self.duration_s,
            self.sample_rate_hz,
            subject_id=subj.record.subject_id,
        )

    def feature_target_r2(self) -> dict[str, dict[str, float]]:
        """r^2 of each stored feature against each spirometric target."""
        out: dict[str, dict[str, float]] = {}
        feats = {
            "fit": [s.features.fit for s in self.subjects],
            "rr": [s.features.rr for s in self.subjects],
            "tv": [s.features.tv for s in self.subjects],
        }
        targets = {
            "fev1_fvc": [s.record.fev1_fvc for s in self.subjects],
            "fev1_l": [s.record.fev1_l for s in self.subjects],
            "fvc_l": [s.record.fvc_l for s in self.subjects],
        }
        for fname, fvals in feats.items():
            out[fname] = {}
            for tname, tvals in targets.items():
                out[fname][tname] = pearson(fvals, tvals).r_squared
        return out


def _draw_clipped(rng: np.random.Generator, spec: tuple[float, float, float, float]):
    mean, sd, lo, hi = spec
    return float(min(hi, max(lo, mean + sd * rng.standard_normal())))


def _mean_cycle_features(
    cycles: list[BreathCycle], bmi: float
) -> TidalFeatures:
    fits = [c.t_i_s / c.t_tot_s for c in cycles]
    rrs = [60.0 / (bmi * c.t_tot_s) for c in cycles]
    tvs = [c.ra_n * bmi for c in cycles]
    return TidalFeatures(
        fit=sum(fits) / len(fits),
        rr=sum(rrs) / len(rrs),
        tv=sum(tvs) / len(tvs),
        n_cycles=len(cycles),
    )


def generate_cohort(
    n: int,
    obstructed_fraction: float,
    seed: int,
    jitter: float = DEFAULT_JITTER,
    noise_sd: float = DEFAULT_NOISE_SD,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ,
) -> SyntheticCohort:
    """Generate a two-regime cohort with exact stored ground truth.

    Stored per-subject features are the means over the per-cycle draws of
    that subject's actual signal (the signal is generated here to compute
    them and can be regenerated bit-identically from the stored profile).
    Spirometric values derive from the features: %predicted FEV1 is the
    fixed linear model plus N(0, noise_sd) noise; the FEV1/FVC ratio is a
    deterministic regime-dependent function of fit; FVC tracks tv; FEV1 is
    exactly ratio times FVC.
    """
    if n < 4:
        raise InvalidParameterError("n must be >= 4")
    if not (0.0 <= obstructed_fraction <= 1.0):
        raise InvalidParameterError("obstructed_fraction must lie in [0, 1]")
    if jitter < 0 or noise_sd < 0:
        raise InvalidParameterError("jitter and noise_sd must be >= 0")

    master = _philox(seed)
    n_obstructed = int(round(n * obstructed_fraction))
    flags = np.array([True] * n_obstructed + [False] * (n - n_obstructed))
    flags = flags[master.permutation(n)]

    width = max(2, len(str(n)))
    subjects: list[SyntheticSubject] = []
    deterministic_pct: list[float] = []
    realized_pct: list[float] = []
    rows: list[tuple[SubjectRecord, BreathProfile]] = []

    for i in range(n):
        obstructed = bool(flags[i])
        regime = _OBSTRUCTED_REGIME if obstructed else _NORMAL_REGIME
        bmi = float(min(40.0, max(18.0, 27.0 + 4.0 * master.standard_normal())))
        fit = _draw_clipped(master, regime["fit"])
        t_tot = _draw_clipped(master, regime["t_tot"])
        ra = _draw_clipped(master, regime["ra"])
        age = float(master.integers(35, 76))
        pct_noise = noise_sd * master.standard_normal()
        fvc_noise = (noise_sd / 30.0) * master.standard_normal()
        signal_seed = int(master.integers(0, 2**63))

        profile = BreathProfile(
            t_i_s=fit * t_tot,
            t_tot_s=t_tot,
            ra_n=ra,
            jitter=jitter,
            seed=signal_seed,
        )
        _, cycles = generate_signal(profile, duration_s, sample_rate_hz)
        features = _mean_cycle_features(cycles, bmi)

        det = SEVERITY_INTERCEPT + sum(
            coef * getattr(features, name) for name, coef in SEVERITY_COEFFS
        )
        pct = float(min(195.0, max(5.0, det + pct_noise)))
        if obstructed:
            ratio = min(0.68, max(0.32, 0.50 + 0.55 * (features.fit - 0.30)))
        else:
            ratio = min(0.90, max(0.72, 0.78 + 0.50 * (features.fit - 0.40)))
        fvc = float(min(6.5, max(0.8, 0.9 + 0.045 * features.tv + fvc_noise)))
        fev1 = ratio * fvc

        record = SubjectRecord(
            subject_id=f"S{i + 1:0{width}d}",
            age_y=age,
            bmi=bmi,
            fev1_l=fev1,
            fvc_l=fvc,
            fev1_fvc=ratio,
            fev1_pct_pred=pct,
        )
        deterministic_pct.append(det)
        realized_pct.append(pct)
        rows.append((record, profile))
        subjects.append(
            SyntheticSubject(record=record, profile=profile, features=features)
        )

    # Directional sanity over the regimes, mirroring the obstructed-breathing
    # physiology the regimes encode.
    obs = [s for s, f in zip(subjects, flags) if f]
    nor = [s for s, f in zip(subjects, flags) if not f]
    if obs and nor:
        mean = lambda vals: sum(vals) / len(vals)
        assert mean([s.features.fit for s in obs]) < mean(
            [s.features.fit for s in nor]
        )
        assert mean([s.features.rr for s in obs]) > mean(
            [s.features.rr for s in nor]
        )
        assert mean([s.features.tv for s in obs]) < mean(
            [s.features.tv for s in nor]
        )

    det_arr = np.array(deterministic_pct)
    var_signal = float(det_arr.var())
    if noise_sd == 0.0 or var_signal == 0.0:
        r2 = 1.0 if noise_sd == 0.0 else 0.0
    else:
        r2 = var_signal / (var_signal + noise_sd * noise_sd)
    generating_model = RegressionModel(
        name="fev1_pct_pred",
        intercept=SEVERITY_INTERCEPT,
        coefficients=SEVERITY_COEFFS,
        r_squared=r2,
        p_value=p_from_f(r2, len(SEVERITY_COEFFS), n) if n > 4 else 1.0,
        rmse=noise_sd,
        n_obs=n,
    )
    return SyntheticCohort(
        subjects=tuple(subjects),
        generating_model=generating_model,
        noise_sd=noise_sd,
        duration_s=duration_s,
        sample_rate_hz=sample_rate_hz,
    )
