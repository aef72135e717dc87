"""Chest-belt waveform representation and breath-cycle segmentation.

A breath cycle is the trough-to-trough span of the belt force signal: the
inspiratory phase runs from a trough up to the next peak, the expiratory
phase back down to the following trough.  Segmentation finds alternating
troughs and peaks with an excursion threshold, then merges any cycle shorter
than the minimum plausible breath duration into its neighbour, so the
returned cycles always form one consecutive chain of trough-peak-trough
triples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InsufficientDataError, InvalidInputError, InvalidParameterError

DEFAULT_MIN_CYCLE_S = 1.5
DEFAULT_MIN_CYCLES = 6
# Default excursion threshold as a fraction of the signal interquartile range.
DEFAULT_PROMINENCE_IQR_FRACTION = 0.1


@dataclass(frozen=True)
class RespiratorySignal:
    """Uniformly sampled force-versus-time waveform from a respiration belt.

    Attributes
    ----------
    samples : np.ndarray
        Force values in Newtons, float64, read-only.
    sample_rate_hz : float
        Sampling rate, > 0.
    subject_id : str
        Opaque identifier carried through to reports.
    """

    samples: np.ndarray
    sample_rate_hz: float
    subject_id: str = ""

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise InvalidInputError("signal needs at least 2 samples")
        if not np.isfinite(arr).all():
            raise InvalidInputError("signal contains non-finite samples")
        if not (self.sample_rate_hz > 0 and np.isfinite(self.sample_rate_hz)):
            raise InvalidParameterError("sample_rate_hz must be positive")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def times_s(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate_hz


@dataclass(frozen=True)
class BreathCycle:
    """One segmented breath: trough, peak and closing trough.

    ``t_i_s`` is the inspiratory (trough to peak) duration, ``t_tot_s`` the
    full cycle duration, and ``ra_n`` the force rise from the opening trough
    to the peak.  The expiratory duration is ``t_tot_s - t_i_s`` by
    construction and is never stored separately.
    """

    trough_idx: int
    peak_idx: int
    end_trough_idx: int
    t_i_s: float
    t_tot_s: float
    ra_n: float

    def __post_init__(self):
        if not (0 <= self.trough_idx < self.peak_idx < self.end_trough_idx):
            raise InvalidInputError(
                "cycle indices must satisfy trough < peak < end trough"
            )
        if not (0.0 < self.t_i_s < self.t_tot_s):
            raise InvalidInputError("cycle durations must satisfy 0 < t_i < t_tot")
        if not self.ra_n > 0.0:
            raise InvalidInputError("cycle amplitude must be positive")

    @classmethod
    def from_indices(
        cls,
        samples: np.ndarray,
        sample_rate_hz: float,
        trough_idx: int,
        peak_idx: int,
        end_trough_idx: int,
    ) -> "BreathCycle":
        return cls(
            trough_idx=int(trough_idx),
            peak_idx=int(peak_idx),
            end_trough_idx=int(end_trough_idx),
            t_i_s=(peak_idx - trough_idx) / sample_rate_hz,
            t_tot_s=(end_trough_idx - trough_idx) / sample_rate_hz,
            ra_n=float(samples[peak_idx] - samples[trough_idx]),
        )


@dataclass(frozen=True)
class CleanRegion:
    """A contiguous run of consecutive breath cycles chosen for analysis.

    ``quality_score`` is 1 / (1 + cv(t_tot) + cv(ra)) over the run, where cv
    is the coefficient of variation (population std over mean).  The score is
    a heuristic for "low motion artifact, steady breathing"; callers that
    prefer explicit cycle indices can construct a CleanRegion directly.
    """

    cycles: tuple[BreathCycle, ...]
    quality_score: float

    def __post_init__(self):
        cycles = tuple(self.cycles)
        if len(cycles) < 1:
            raise InsufficientDataError("clean region needs at least one cycle")
        for prev, nxt in zip(cycles, cycles[1:]):
            if prev.end_trough_idx != nxt.trough_idx:
                raise InvalidInputError("clean region cycles must be consecutive")
        if not (0.0 <= self.quality_score <= 1.0):
            raise InvalidInputError("quality_score must lie in [0, 1]")
        object.__setattr__(self, "cycles", cycles)

    def __len__(self) -> int:
        return len(self.cycles)


def detrend(signal: RespiratorySignal, window_s: float) -> RespiratorySignal:
    """Remove baseline wander via a centered moving-average baseline.

    The effective window is ``2*floor(round(window_s * fs) / 2) + 1`` samples
    (always odd); edge windows are truncated.  Output length equals input
    length.
    """
    if not window_s > 0:
        raise InvalidParameterError("window_s must be positive")
    n_window = int(round(window_s * signal.sample_rate_hz))
    if n_window < 3:
        raise InvalidParameterError(
            f"window of {window_s} s spans {n_window} samples at "
            f"{signal.sample_rate_hz} Hz; need at least 3"
        )
    half = n_window // 2
    baseline = _kernels.moving_average(signal.samples, half)
    return RespiratorySignal(
        samples=signal.samples - baseline,
        sample_rate_hz=signal.sample_rate_hz,
        subject_id=signal.subject_id,
    )


def default_prominence(signal: RespiratorySignal) -> float:
    """Default excursion threshold: a fixed fraction of the signal IQR."""
    q1, q3 = np.percentile(signal.samples, [25.0, 75.0])
    iqr = float(q3 - q1)
    if iqr <= 0.0:
        raise InvalidInputError(
            f"signal {signal.subject_id!r} has zero interquartile range; "
            "supply min_prominence_n explicitly"
        )
    return DEFAULT_PROMINENCE_IQR_FRACTION * iqr


def _merge_short_cycles(
    extrema: list[tuple[int, int]], values: np.ndarray, min_samples: int
) -> list[tuple[int, int]]:
    """Merge trough-to-trough cycles shorter than min_samples into a neighbour.

    ``extrema`` is the alternating (index, kind) list from the scan.  A short
    cycle is removed by deleting its shallower flanking trough together with
    the lower of the two peaks adjacent to that trough, which preserves
    alternation and keeps every surviving peak at least the scan threshold
    above its flanking troughs.
    """
    ext = list(extrema)
    while True:
        troughs = [j for j, (_, kind) in enumerate(ext) if kind == -1]
        short_at = None
        for a, b in zip(troughs, troughs[1:]):
            if ext[b][0] - ext[a][0] < min_samples:
                short_at = (a, b)
                break
        if short_at is None:
            return ext
        a, b = short_at
        has_prev_peak = a - 1 >= 0
        has_next_peak = b + 1 < len(ext)
        if has_prev_peak and has_next_peak:
            # Drop the shallower trough; merge toward that side.
            merge_back = values[ext[a][0]] >= values[ext[b][0]]
        elif has_prev_peak:
            merge_back = True
        elif has_next_peak:
            merge_back = False
        else:
            # A lone short cycle: nothing to merge with, discard it.
            del ext[a : b + 1]
            continue
        if merge_back:
            peak_l, peak_r = a - 1, a + 1
            trough_rm = a
        else:
            peak_l, peak_r = b - 1, b + 1
            trough_rm = b
        peak_rm = peak_l if values[ext[peak_l][0]] <= values[ext[peak_r][0]] else peak_r
        del ext[max(trough_rm, peak_rm)]
        del ext[min(trough_rm, peak_rm)]


def segment_breaths(
    signal: RespiratorySignal,
    min_cycle_s: float = DEFAULT_MIN_CYCLE_S,
    min_prominence_n: float | None = None,
) -> list[BreathCycle]:
    """Segment a signal into consecutive trough-peak-trough breath cycles.

    Parameters
    ----------
    signal : RespiratorySignal
        Waveform to segment (detrend first if it carries baseline wander).
    min_cycle_s : float
        Minimum plausible breath duration; shorter trough-to-trough spans are
        merged into a neighbouring cycle.
    min_prominence_n : float, optional
        Excursion threshold in Newtons.  Every returned peak rises at least
        this far above both flanking troughs.  Defaults to 10% of the signal
        interquartile range.

    Returns
    -------
    list of BreathCycle
        In time order; consecutive cycles share their boundary trough.
        Partial cycles at the signal edges are discarded.  An empty list
        means no complete cycle was found (not an error).
    """
    if not min_cycle_s > 0:
        raise InvalidParameterError("min_cycle_s must be positive")
    if min_prominence_n is None:
        min_prominence_n = default_prominence(signal)
    if not min_prominence_n > 0:
        raise InvalidParameterError("min_prominence_n must be positive")

    idx, kinds = _kernels.alternating_extrema(signal.samples, float(min_prominence_n))
    extrema = list(zip(idx.tolist(), kinds.tolist()))
    # The scan's first extremum can be the signal's first sample (the running
    # anchor before direction is known).  A boundary sample has no outer
    # flank, so it cannot open or close a breath cycle.
    last = len(signal.samples) - 1
    extrema = [(i, k) for i, k in extrema if 0 < i < last]
    min_samples = int(np.ceil(min_cycle_s * signal.sample_rate_hz))
    extrema = _merge_short_cycles(extrema, signal.samples, min_samples)

    cycles: list[BreathCycle] = []
    for j in range(len(extrema) - 2):
        i0, k0 = extrema[j]
        i1, k1 = extrema[j + 1]
        i2, k2 = extrema[j + 2]
        if (k0, k1, k2) == (-1, 1, -1):
            cycles.append(
                BreathCycle.from_indices(
                    signal.samples, signal.sample_rate_hz, i0, i1, i2
                )
            )
    return cycles


def _run_quality(cycles: list[BreathCycle]) -> float:
    t_tot = np.array([c.t_tot_s for c in cycles])
    ra = np.array([c.ra_n for c in cycles])
    cv_t = float(t_tot.std() / t_tot.mean())
    cv_ra = float(ra.std() / ra.mean())
    return 1.0 / (1.0 + cv_t + cv_ra)


def select_clean_region(
    cycles: list[BreathCycle],
    signal: RespiratorySignal,
    min_cycles: int = DEFAULT_MIN_CYCLES,
) -> CleanRegion:
    """Pick the contiguous cycle run with the highest quality score.

    All contiguous runs of at least ``min_cycles`` cycles are scored with
    1 / (1 + cv(t_tot) + cv(ra)); the best-scoring run wins.  Ties go to the
    earliest run, and among equal-scoring runs with the same start, to the
    longest.
    """
    if min_cycles < 1:
        raise InvalidParameterError("min_cycles must be >= 1")
    n = len(cycles)
    if n < min_cycles:
        raise InsufficientDataError(
            f"found {n} cycles but {min_cycles} are required"
        )
    last = len(signal.samples) - 1
    for c in cycles:
        if c.end_trough_idx > last:
            raise InvalidInputError("cycle indices fall outside the signal")

    best_score = -1.0
    best: tuple[int, int] | None = None
    for start in range(n):
        for stop in range(start + 1, n + 1):
            if stop - start >= 2:
                prev, cur = cycles[stop - 2], cycles[stop - 1]
                if prev.end_trough_idx != cur.trough_idx:
                    break
            if stop - start < min_cycles:
                continue
            score = _run_quality(cycles[start:stop])
            better = score > best_score + 1e-15
            same = abs(score - best_score) <= 1e-15
            if better or (same and best is not None and start == best[0] and stop > best[1]):
                best_score = score
                best = (start, stop)
    if best is None:
        raise InsufficientDataError(
            f"no contiguous run of {min_cycles} consecutive cycles"
        )
    start, stop = best
    return CleanRegion(cycles=tuple(cycles[start:stop]), quality_score=best_score)
