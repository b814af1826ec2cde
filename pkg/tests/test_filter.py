import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emtrack.errors import DuplicateFrequency, LengthMismatch, NyquistViolation
from emtrack.filter import LeakageWarning, build_demod, cosine_table, extract

from oracles import naive_dft_cos

FS = 100000.0
FREQS = [20000.0 + 2000.0 * k for k in range(8)]


def tones(amps, freqs, n, fs=FS):
    t = np.arange(n) / fs
    return sum(a * np.cos(2 * np.pi * f * t) for a, f in zip(amps, freqs))


class TestBuild:
    @pytest.mark.parametrize("n", [250, 500, 1000, 2000, 5000])
    def test_default_frequencies_are_bin_aligned(self, n):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            m = build_demod(FREQS, n, FS)
        assert all(m.bin_aligned)
        np.testing.assert_array_equal(m.bins, np.round(m.bins))
        assert m.rows.shape == (16, n)

    def test_bins_at_1000(self):
        m = build_demod(FREQS, 1000, FS)
        np.testing.assert_array_equal(m.bins, [200 + 20 * k for k in range(8)])

    def test_misaligned_warns(self):
        with pytest.warns(LeakageWarning):
            m = build_demod([20050.0, 22000.0], 1000, FS)
        assert m.bin_aligned == (False, True)

    def test_rejects_short_frame(self):
        with pytest.raises(ValueError):
            build_demod(FREQS, 49, FS)

    def test_rejects_duplicates(self):
        with pytest.raises(DuplicateFrequency):
            build_demod([20000.0, 20000.0], 1000, FS)

    @pytest.mark.parametrize("f", [50000.0, 60000.0, 0.0])
    def test_rejects_out_of_band(self, f):
        with pytest.raises(NyquistViolation):
            build_demod([20000.0, f], 1000, FS)

    def test_rows_read_only(self):
        m = build_demod(FREQS, 500, FS)
        with pytest.raises(ValueError):
            m.rows[0, 0] = 1.0

    def test_cosine_table_matches_direct_evaluation(self):
        table = cosine_table(FREQS, 2000, FS)
        n = np.arange(2000)
        direct = np.cos(2 * np.pi * np.outer(FREQS, n) / FS)
        np.testing.assert_allclose(table, direct, atol=1e-9)


class TestExtract:
    def test_single_tone_amplitude(self):
        m = build_demod([20000.0], 1000, FS)
        out = extract(m, 3.0 * np.cos(2 * np.pi * 20000.0 * np.arange(1000) / FS))
        assert out.amplitudes[0] == pytest.approx(3.0, abs=1e-12)
        assert abs(out.quadrature[0]) < 1e-12

    def test_two_tones_no_crosstalk(self):
        m = build_demod([20000.0, 22000.0], 1000, FS)
        out = extract(m, tones([1.0, 0.5], [20000.0, 22000.0], 1000))
        np.testing.assert_allclose(out.amplitudes, [1.0, 0.5], atol=1e-12)

    @pytest.mark.parametrize("n", [250, 500, 1000, 2000, 5000])
    def test_all_coils_exact(self, n, rng):
        amps = rng.uniform(-1e-3, 1e-3, 8)
        m = build_demod(FREQS, n, FS)
        out = extract(m, tones(amps, FREQS, n))
        assert np.max(np.abs(out.amplitudes - amps)) / np.max(np.abs(amps)) < 1e-9

    def test_pure_sine_projects_to_zero_amplitude(self):
        m = build_demod(FREQS, 1000, FS)
        x = np.sin(2 * np.pi * 24000.0 * np.arange(1000) / FS)
        out = extract(m, x)
        assert np.max(np.abs(out.amplitudes)) < 1e-12
        assert out.quadrature[2] == pytest.approx(1.0, abs=1e-12)

    def test_length_mismatch(self):
        m = build_demod(FREQS, 1000, FS)
        with pytest.raises(LengthMismatch):
            extract(m, np.zeros(999))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
    def test_linearity(self, seed, a, b):
        rng = np.random.default_rng(seed)
        m = build_demod(FREQS, 500, FS)
        x, y = rng.normal(size=500), rng.normal(size=500)
        lhs = extract(m, a * x + b * y).amplitudes
        rhs = a * extract(m, x).amplitudes + b * extract(m, y).amplitudes
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_rows_orthogonal(self):
        m = build_demod(FREQS, 1000, FS)
        gram = m.rows @ m.rows.T * (2.0 / 1000)
        np.testing.assert_allclose(gram, np.eye(16), atol=1e-10)

    def test_matches_naive_dft(self, rng):
        n = 500
        x = rng.normal(size=n)
        m = build_demod(FREQS, n, FS)
        expected = [naive_dft_cos(x, f, FS) for f in FREQS]
        np.testing.assert_allclose(extract(m, x).amplitudes, expected, atol=1e-10)

    def test_noise_variance(self, rng):
        n, sigma, trials = 500, 0.1, 4000
        m = build_demod(FREQS, n, FS)
        amps = np.array([extract(m, rng.normal(0, sigma, n)).amplitudes for _ in range(trials)])
        var = amps.var(axis=0)
        expected = 2 * sigma**2 / n
        # sample variance relative SE is sqrt(2/trials) ~ 2.2 %
        np.testing.assert_allclose(var, expected, rtol=0.1)

    def test_noisy_estimate_unbiased(self, rng):
        n, sigma, trials = 1000, 0.05, 2000
        true = np.linspace(-1e-2, 1e-2, 8)
        m = build_demod(FREQS, n, FS)
        clean = tones(true, FREQS, n)
        amps = np.array([extract(m, clean + rng.normal(0, sigma, n)).amplitudes for _ in range(trials)])
        se = np.sqrt(2 * sigma**2 / n / trials)
        assert np.all(np.abs(amps.mean(axis=0) - true) < 3.5 * se)

    def test_sequence_metadata_carried(self, array, sensor):
        from emtrack.acquisition import AcquisitionConfig, synth_frame
        from emtrack.pose import Pose5DOF

        cfg = AcquisitionConfig(frame_size=500)
        frame = synth_frame(array, Pose5DOF(0, 0, 0.1), sensor, cfg, sequence=7, start_time=123)
        out = extract(build_demod(array.frequencies, 500, cfg.sample_rate), frame)
        assert out.frame_sequence == 7 and out.frame_time == 123
