"""Deterministic synthetic signal and cohort generation."""

import numpy as np
import pytest

from tidalbelt.classify import ObstructionLabel
from tidalbelt.errors import InvalidParameterError
from tidalbelt.respsignal import segment_breaths, select_clean_region
from tidalbelt.synthgen import (
    BreathProfile,
    generate_cohort,
    generate_signal,
)


def _profile(**kw):
    base = dict(t_i_s=1.4, t_tot_s=3.5, ra_n=1.2, jitter=0.04, seed=5)
    base.update(kw)
    return BreathProfile(**base)


class TestGenerateSignal:
    def test_bit_identical_reruns(self):
        p = _profile()
        s1, c1 = generate_signal(p, 60.0, 25.0)
        s2, c2 = generate_signal(p, 60.0, 25.0)
        assert np.array_equal(s1.samples, s2.samples)
        assert c1 == c2

    def test_seed_changes_signal(self):
        s1, _ = generate_signal(_profile(seed=1), 60.0, 25.0)
        s2, _ = generate_signal(_profile(seed=2), 60.0, 25.0)
        assert not np.array_equal(s1.samples, s2.samples)

    def test_zero_jitter_cycles_nominal(self):
        p = _profile(jitter=0.0)
        fs = 25.0
        _, cycles = generate_signal(p, 60.0, fs)
        for c in cycles:
            assert c.t_tot_s == pytest.approx(3.5, abs=1 / fs)
            assert c.t_i_s == pytest.approx(1.4, abs=1 / fs)
            assert c.ra_n == pytest.approx(1.2, abs=1e-12)

    def test_truth_is_on_sample_grid(self):
        _, cycles = generate_signal(_profile(), 60.0, 25.0)
        for a, b in zip(cycles, cycles[1:]):
            assert a.end_trough_idx == b.trough_idx
        for c in cycles:
            assert c.t_i_s * 25.0 == pytest.approx(c.peak_idx - c.trough_idx)

    def test_segmentation_recovers_truth_exactly(self, clean_signal):
        sig, truth = clean_signal
        got = segment_breaths(sig)
        truth_keys = {(c.trough_idx, c.peak_idx, c.end_trough_idx) for c in truth}
        got_keys = {(c.trough_idx, c.peak_idx, c.end_trough_idx) for c in got}
        assert got_keys <= truth_keys
        assert len(truth_keys - got_keys) <= 2  # edge cycles may be trimmed

    def test_frozen_jitter_dispersion(self):
        # jitter 0.05 at seed 42 lands at cv(t_tot) = 0.0579; the band is
        # wide enough to survive RNG-stream-preserving refactors only
        _, cycles = generate_signal(
            _profile(jitter=0.05, seed=42), 60.0, 25.0
        )
        t = np.array([c.t_tot_s for c in cycles])
        cv = t.std() / t.mean()
        assert 0.03 <= cv <= 0.07

    def test_drift_superimposed(self):
        p0 = _profile(drift_slope_n_per_s=0.0)
        p1 = _profile(drift_slope_n_per_s=0.02)
        s0, c0 = generate_signal(p0, 60.0, 25.0)
        s1, c1 = generate_signal(p1, 60.0, 25.0)
        gap = s1.samples - s0.samples
        t = s0.times_s()
        assert np.allclose(gap, 0.02 * t, atol=1e-12)
        assert c0 == c1  # ground truth ignores the drift

    def test_artifact_burst_local(self):
        burst = (25.0, 3.0, 1.8)
        p0 = _profile()
        p1 = _profile(artifact_bursts=(burst,))
        s0, _ = generate_signal(p0, 60.0, 25.0)
        s1, _ = generate_signal(p1, 60.0, 25.0)
        diff = np.abs(s1.samples - s0.samples)
        inside = diff[int(25 * 25) : int(28 * 25)]
        outside = np.concatenate([diff[: int(25 * 25)], diff[int(28 * 25) :]])
        assert inside.max() > 0.5
        assert outside.max() == 0.0

    def test_preconditions(self):
        with pytest.raises(InvalidParameterError):
            generate_signal(_profile(), duration_s=5.0)  # < 2 cycles
        with pytest.raises(InvalidParameterError):
            generate_signal(_profile(), sample_rate_hz=2.0)

    def test_profile_validation(self):
        with pytest.raises(InvalidParameterError):
            _profile(t_i_s=4.0)  # exceeds t_tot
        with pytest.raises(InvalidParameterError):
            _profile(ra_n=0.0)
        with pytest.raises(InvalidParameterError):
            _profile(jitter=-0.1)


class TestGenerateCohort:
    def test_bit_identical_reruns(self):
        c1 = generate_cohort(12, 0.5, seed=3)
        c2 = generate_cohort(12, 0.5, seed=3)
        assert c1 == c2
        s1, t1 = c1.signal_for(4)
        s2, t2 = c2.signal_for(4)
        assert np.array_equal(s1.samples, s2.samples)
        assert t1 == t2

    def test_split_arithmetic(self):
        cohort = generate_cohort(25, 0.8, seed=7)
        labels = [s.label for s in cohort.subjects]
        assert labels.count(ObstructionLabel.OBSTRUCTED) == 20
        assert labels.count(ObstructionLabel.NORMAL) == 5

    def test_labels_consistent_with_ratio(self):
        cohort = generate_cohort(16, 0.5, seed=11)
        for s in cohort.subjects:
            if s.record.fev1_fvc < 0.70:
                assert s.label is ObstructionLabel.OBSTRUCTED
            else:
                assert s.label is ObstructionLabel.NORMAL

    def test_directional_separation(self):
        cohort = generate_cohort(30, 0.5, seed=13)
        obs = [s for s in cohort.subjects if s.label is ObstructionLabel.OBSTRUCTED]
        nor = [s for s in cohort.subjects if s.label is ObstructionLabel.NORMAL]
        mean = lambda xs: sum(xs) / len(xs)
        assert mean([s.features.fit for s in obs]) < mean(
            [s.features.fit for s in nor]
        )
        assert mean([s.features.rr for s in obs]) > mean(
            [s.features.rr for s in nor]
        )
        assert mean([s.features.tv for s in obs]) < mean(
            [s.features.tv for s in nor]
        )

    def test_fev1_product_identity(self):
        cohort = generate_cohort(10, 0.5, seed=17)
        for s in cohort.subjects:
            rec = s.record
            assert rec.fev1_l == rec.fev1_fvc * rec.fvc_l

    def test_noiseless_cohort_recovers_generating_plane(self):
        from tidalbelt.classify import severity_fit

        cohort = generate_cohort(20, 0.5, seed=19, noise_sd=0.0)
        data = [
            (s.features, s.record.fev1_pct_pred) for s in cohort.subjects
        ]
        m = severity_fit(data)
        assert m.intercept == pytest.approx(-25.0, abs=1e-9)
        coefs = dict(m.coefficients)
        assert coefs["fit"] == pytest.approx(280.0, abs=1e-9)
        assert coefs["rr"] == pytest.approx(-12.0, abs=1e-9)
        assert coefs["tv"] == pytest.approx(0.15, abs=1e-9)
        assert m.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_generating_model_carries_analytic_r2(self):
        cohort = generate_cohort(25, 0.8, seed=7)
        assert cohort.generating_model.rmse == cohort.noise_sd
        assert 0.5 < cohort.generating_model.r_squared < 1.0
        table = cohort.feature_target_r2()
        assert set(table) == {"fit", "rr", "tv"}
        for row in table.values():
            assert set(row) == {"fev1_fvc", "fev1_l", "fvc_l"}
            for v in row.values():
                assert 0.0 <= v <= 1.0

    def test_all_normal_cohort(self):
        cohort = generate_cohort(8, 0.0, seed=23)
        assert all(s.label is ObstructionLabel.NORMAL for s in cohort.subjects)

    def test_signals_segment_cleanly(self):
        cohort = generate_cohort(6, 0.5, seed=29)
        for i in range(6):
            sig, _ = cohort.signal_for(i)
            cycles = segment_breaths(sig)
            region = select_clean_region(cycles, sig)
            assert len(region) >= 6

    def test_preconditions(self):
        with pytest.raises(InvalidParameterError):
            generate_cohort(3, 0.5, seed=1)
        with pytest.raises(InvalidParameterError):
            generate_cohort(10, 1.2, seed=1)
        with pytest.raises(InvalidParameterError):
            generate_cohort(10, 0.5, seed=1, noise_sd=-1.0)
