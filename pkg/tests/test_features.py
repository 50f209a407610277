import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from keyword_dtw.energy import WindowSpec, pmct, prepare
from keyword_dtw.errors import DegenerateBankError, UsageError, ZeroPowerError
from keyword_dtw.features import (
    FeatureMatrix,
    SpectrumFrame,
    dft_power,
    f0_zcr,
    frame_features,
    log_mag_fb_log,
    make_filterbank,
    spectral_kurtosis,
    spectral_mean,
    spectral_skewness,
    spectral_width,
    summarize,
)
from keyword_dtw.framing import FrameParams, FrameSet, cut_frames
from keyword_dtw.signal_io import Signal, gen_tone


def direct_dft(x):
    """X[l] = 1/N sum_n x[n] exp(-2j pi l n / N), by explicit summation."""
    n = len(x)
    out = []
    for l in range(n):
        out.append(sum(x[m] * complex(math.cos(2 * math.pi * l * m / n), -math.sin(2 * math.pi * l * m / n))
                       for m in range(n)) / n)
    return np.array(out)


def spectrum(power, rate=8000.0, n=None):
    power = np.asarray(power, dtype=float)
    n = n or 2 * (len(power) - 1)
    return SpectrumFrame(power, np.arange(len(power)) * rate / n)


def brute_moments(freqs, power):
    total = sum(power)
    mu = sum(f * p for f, p in zip(freqs, power)) / total
    var = sum((f - mu) ** 2 * p for f, p in zip(freqs, power)) / total
    sigma = math.sqrt(var)
    skew = sum((f - mu) ** 3 * p for f, p in zip(freqs, power)) / total / sigma**3
    kurt = sum((f - mu) ** 4 * p for f, p in zip(freqs, power)) / total / sigma**4
    return mu, sigma, skew, kurt


def frameset(frames, rate=8000.0):
    frames = np.atleast_2d(np.asarray(frames, dtype=float))
    k, n = frames.shape
    starts = np.arange(k) * n
    return FrameSet(frames, rate, starts, (starts + (n - 1) / 2) / rate)


class TestDft:
    def test_constant(self):
        sp = dft_power(np.full(64, 0.8), 8000)
        assert len(sp.power) == 33
        assert sp.power[0] == pytest.approx(0.64, abs=1e-15)
        assert np.all(sp.power[1:] <= 1e-18)

    def test_on_bin_sine(self):
        n, l0 = 240, 13
        x = np.sin(2 * np.pi * l0 * np.arange(n) / n)
        sp = dft_power(x, 8000)
        assert sp.power[l0] == pytest.approx(0.25, abs=1e-9)
        others = np.delete(sp.power, l0)
        assert np.all(others <= 1e-12)
        assert sp.freqs[l0] == pytest.approx(l0 * 8000 / n)

    @pytest.mark.parametrize("n", [7, 16, 33])
    def test_matches_direct_summation(self, n):
        x = np.random.default_rng(n).normal(size=n)
        ref = np.abs(direct_dft(x)[: n // 2 + 1]) ** 2
        np.testing.assert_allclose(dft_power(x, 1000).power, ref, rtol=1e-9, atol=1e-15)

    def test_parseval(self):
        x = np.random.default_rng(9).normal(size=50)
        full = np.abs(direct_dft(x)) ** 2
        assert np.sum(x**2) / 50 == pytest.approx(full.sum(), rel=1e-9)


class TestZcr:
    def test_constant_sign(self):
        assert f0_zcr(frameset(np.ones(240)), WindowSpec("rectangular", 240))[0] == 0

    def test_alternating(self):
        x = np.tile([1.0, -1.0], 120)
        assert f0_zcr(frameset(x), WindowSpec("rectangular", 240))[0] == pytest.approx(4000)

    def test_100hz_three_periods(self):
        # phase keeps zero crossings off the sample grid: 6 sign changes over 239 pairs
        x = np.sin(2 * np.pi * 100 * np.arange(240) / 8000 + np.pi / 7)
        est = f0_zcr(frameset(x), WindowSpec("rectangular", 240))[0]
        assert est == pytest.approx(6 / 239 * 4000)
        assert abs(est - 100) <= 5

    @pytest.mark.parametrize("cycles", [5, 8, 12, 20, 30, 60])
    def test_window_invariance_on_bin_tones(self, cycles):
        # phase 1 rad puts no crossing on a sample nor between the last sample and the frame end
        x = np.sin(2 * np.pi * cycles * np.arange(240) / 240 + 1.0)
        fs = frameset(x)
        rect = f0_zcr(fs, WindowSpec("rectangular", 240))[0]
        ham = f0_zcr(fs, WindowSpec("hamming", 240))[0]
        assert abs(rect - ham) / rect < 0.02


class TestMoments:
    def test_point_mass(self):
        p = np.zeros(121)
        p[17] = 3.0
        sp = spectrum(p)
        mu = spectral_mean(sp)
        assert mu == sp.freqs[17]
        assert spectral_width(sp, mu) == 0
        assert spectral_skewness(sp, mu, 0.0) == 0
        assert spectral_kurtosis(sp, mu, 0.0) == 0

    def test_two_points(self):
        p = np.zeros(121)
        p[10] = p[30] = 1.0
        sp = spectrum(p)
        mu = spectral_mean(sp)
        assert mu == pytest.approx((sp.freqs[10] + sp.freqs[30]) / 2)
        sigma = spectral_width(sp, mu)
        assert sigma == pytest.approx((sp.freqs[30] - sp.freqs[10]) / 2)
        assert spectral_skewness(sp, mu, sigma) == pytest.approx(0, abs=1e-9)
        assert spectral_kurtosis(sp, mu, sigma) == pytest.approx(1, abs=1e-12)

    def test_uniform_width(self):
        sp = spectrum(np.ones(41))
        mu = spectral_mean(sp)
        assert spectral_width(sp, mu) == pytest.approx(np.std(sp.freqs), rel=1e-12)

    def test_on_bin_tone(self):
        x = np.sin(2 * np.pi * 13 * np.arange(240) / 240)
        sp = dft_power(x, 8000)
        mu = spectral_mean(sp)
        assert abs(mu - 13 * 8000 / 240) <= 1e-6
        assert spectral_width(sp, mu) <= 1e-3

    def test_three_bin_asymmetric(self):
        p = np.zeros(9)
        p[[1, 2, 6]] = [0.5, 2.0, 1.0]
        sp = spectrum(p)
        ref = brute_moments(list(sp.freqs), list(p))
        mu = spectral_mean(sp)
        sigma = spectral_width(sp, mu)
        got = (mu, sigma, spectral_skewness(sp, mu, sigma), spectral_kurtosis(sp, mu, sigma))
        np.testing.assert_allclose(got, ref, rtol=1e-12)

    def test_random_eight_bins(self):
        p = np.random.default_rng(0).uniform(0, 1, 8)
        sp = spectrum(p, n=14)
        ref = brute_moments(list(sp.freqs), list(p))
        mu = spectral_mean(sp)
        sigma = spectral_width(sp, mu)
        assert spectral_kurtosis(sp, mu, sigma) == pytest.approx(ref[3], rel=1e-12)
        assert spectral_skewness(sp, mu, sigma) == pytest.approx(ref[2], rel=1e-12)

    def test_zero_spectrum(self):
        sp = spectrum(np.zeros(5))
        for fn in (spectral_mean,):
            with pytest.raises(ZeroPowerError):
                fn(sp)
        with pytest.raises(ZeroPowerError):
            spectral_width(sp, 0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.01, 10), min_size=3, max_size=12), st.integers(1, 20), st.floats(0.01, 100))
    def test_shift_and_scale(self, weights, shift, scale):
        n_bins = len(weights) + shift + 1
        base = np.zeros(n_bins)
        base[: len(weights)] = weights
        moved = np.roll(base, shift) * scale
        a, b = spectrum(base), spectrum(moved)
        ma, mb = spectral_mean(a), spectral_mean(b)
        assert mb - ma == pytest.approx(shift * (a.freqs[1] - a.freqs[0]), abs=1e-9)
        sa, sb = spectral_width(a, ma), spectral_width(b, mb)
        assert sb == pytest.approx(sa, rel=1e-9)
        assert spectral_skewness(b, mb, sb) == pytest.approx(spectral_skewness(a, ma, sa), abs=1e-9)
        assert spectral_kurtosis(b, mb, sb) == pytest.approx(spectral_kurtosis(a, ma, sa), rel=1e-9)


class TestFilterBank:
    def test_log_bank_boundaries(self):
        bank = make_filterbank(44100, 0.03, 8, "logarithmic")
        f_min = 1 / 0.03
        r = (22050 / f_min) ** (1 / 8)
        assert r == pytest.approx(2.25, abs=0.01)
        np.testing.assert_allclose(bank.boundaries, f_min * r ** np.arange(9), rtol=1e-12)
        np.testing.assert_allclose(bank.boundaries[:3], [33.3, 75.1, 169.1], atol=0.1)
        assert bank.boundaries[-1] == 22050

    def test_linear_equal_bands(self):
        bank = make_filterbank(8000, 0.03, 4, "linear", f_min=0.0)
        np.testing.assert_allclose(np.diff(bank.boundaries), 1000)

    def test_single_band(self):
        bank = make_filterbank(8000, 0.03, 1, "linear", f_min=0.0)
        assert bank.size == 1
        np.testing.assert_array_equal(bank.bins[0], np.arange(121))

    @pytest.mark.parametrize("rate,dur,M,scale", [(8000, 0.03, 5, "logarithmic"), (44100, 0.03, 8, "logarithmic"),
                                                  (8000, 0.032, 7, "linear"), (16000, 0.025, 3, "logarithmic")])
    def test_partition(self, rate, dur, M, scale):
        bank = make_filterbank(rate, dur, M, scale)
        allbins = np.concatenate(bank.bins)
        n_k = int(math.floor(dur * rate + 1e-9))
        np.testing.assert_array_equal(np.sort(allbins), np.arange(n_k // 2 + 1))
        assert 0 in bank.bins[0]

    def test_degenerate(self):
        with pytest.raises(DegenerateBankError) as info:
            make_filterbank(8000, 0.03, 40, "logarithmic")
        assert info.value.filter_index >= 1

    def test_flat_and_scaled_spectrum(self):
        bank = make_filterbank(8000, 0.03, 5)
        flat = spectrum(np.ones(121), n=240)
        np.testing.assert_allclose(log_mag_fb_log(flat, bank), 0, atol=1e-9)
        loud = spectrum(100 * np.ones(121), n=240)
        np.testing.assert_allclose(log_mag_fb_log(loud, bank) - log_mag_fb_log(flat, bank), 20, atol=1e-9)

    def test_tone_lights_its_band(self):
        bank = make_filterbank(8000, 0.03, 5)
        # bin 4 (133 Hz) sits in the 4-bin second band; a band mean of dB values
        # only clears 20 dB when the band is narrow
        x = np.sin(2 * np.pi * 4 * np.arange(240) / 240)
        values = log_mag_fb_log(dft_power(x, 8000), bank)
        band = next(m for m, b in enumerate(bank.bins) if 4 in b)
        assert len(bank.bins[band]) == 4
        others = np.delete(values, band)
        assert np.all(values[band] - others >= 20)


class TestFrameFeatures:
    @pytest.fixture
    def tone_frames(self):
        sig = gen_tone(440, 0.5, 8000, 0.5)
        return cut_frames(sig, FrameParams())

    def test_pmct_passthrough(self, tone_frames):
        fm = frame_features(tone_frames, ["PMCT"])
        assert fm.values.shape == (tone_frames.n_frames, 1)
        np.testing.assert_array_equal(fm.values[:, 0], pmct(tone_frames, WindowSpec("hamming", 240)))

    def test_column_order(self, tone_frames):
        fm = frame_features(tone_frames, "PMCT,SPC")
        assert fm.descriptor_names == ("PMCT", "SPC")
        assert fm.values.shape[1] == 2
        assert np.all(np.abs(fm.values[:, 1] - 440) < 40)

    def test_filterbank_columns(self, tone_frames):
        fm = frame_features(tone_frames, ["FB(5)"])
        assert fm.values.shape == (tone_frames.n_frames, 5)

    def test_unknown(self, tone_frames):
        with pytest.raises(UsageError):
            frame_features(tone_frames, ["MFCC"])

    def test_all_finite_on_prepared_noise(self):
        rng = np.random.default_rng(1)
        x = np.concatenate((np.zeros(2000), rng.normal(size=6000), np.zeros(2000)))
        fs = prepare(Signal(x, 8000))
        fm = frame_features(fs, "PMCT,F0_ZCR,SPC,SPW,SKEW,KURT,FB(5)")
        assert np.all(np.isfinite(fm.values))

    def test_zero_frame_inside_span(self):
        frames = np.vstack((np.ones(240), np.zeros(240), np.ones(240)))
        fm = frame_features(frameset(frames), "SPC,SPW,SKEW,KURT")
        np.testing.assert_array_equal(fm.values[1], 0)

    def test_csv_dump(self, tone_frames):
        fm = frame_features(tone_frames, "PMCT,FB(5)")
        buf = io.StringIO()
        fm.to_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].split(",")[0] == "t_center"
        assert len(lines[0].split(",")) == 7
        assert len(lines) == tone_frames.n_frames + 1


class TestSummary:
    def test_constant_column(self):
        s = summarize(FeatureMatrix(np.full((6, 1), 2.5), ("X",), np.arange(6.0)))
        assert (s.mean[0], s.std[0], s.skewness[0], s.kurtosis[0]) == (2.5, 0, 0, 0)

    def test_two_point(self):
        s = summarize(FeatureMatrix(np.array([[0.0], [2.0]]), ("X",), np.arange(2.0)))
        assert (s.mean[0], s.std[0], s.skewness[0], s.kurtosis[0]) == (1, 1, 0, 1)

    def test_against_brute_force(self):
        z = np.random.default_rng(2).normal(size=(37, 3))
        s = summarize(FeatureMatrix(z, ("a", "b", "c"), np.arange(37.0)))
        for j in range(3):
            col = list(z[:, j])
            ref = brute_moments(col, [1.0] * len(col))
            np.testing.assert_allclose((s.mean[j], s.std[j], s.skewness[j], s.kurtosis[j]), ref, rtol=1e-12)
