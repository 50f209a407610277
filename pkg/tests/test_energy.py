import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from keyword_dtw.energy import (
    WindowSpec,
    detect_bounds,
    mmct,
    normalize,
    pmct,
    prepare,
    prepare_with_bounds,
    trim_silence,
)
from keyword_dtw.errors import SilentSignalError, UsageError
from keyword_dtw.framing import FrameParams, FrameSet, cut_frames
from keyword_dtw.signal_io import Signal, gen_tone

KINDS = ["rectangular", "triangular", "hamming"]


def frameset(frames, rate=1000.0):
    frames = np.atleast_2d(np.asarray(frames, dtype=float))
    k, n = frames.shape
    starts = np.arange(k) * n
    return FrameSet(frames, rate, starts, (starts + (n - 1) / 2) / rate)


def padded_tone(amplitude, rate=8000, freq=440.0, lead=0.3, body=0.4, trail=0.3):
    tone = gen_tone(freq, body, rate, amplitude).samples
    return Signal(np.concatenate((np.zeros(int(lead * rate)), tone, np.zeros(int(trail * rate)))), rate)


@pytest.mark.parametrize("kind", KINDS)
def test_window_weights_valid(kind):
    for n in (1, 2, 7, 240):
        w = WindowSpec(kind, n).weights()
        assert len(w) == n and np.all(w >= 0) and np.any(w > 0)


@pytest.mark.parametrize("kind", KINDS)
def test_pmct_constant_frame(kind):
    fs = frameset(np.full((3, 50), -0.7))
    np.testing.assert_allclose(pmct(fs, WindowSpec(kind, 50)), 0.49, atol=1e-15)
    np.testing.assert_allclose(mmct(fs, WindowSpec(kind, 50)), 0.7, atol=1e-15)


def test_pmct_full_period_sine():
    n = np.arange(200)
    fs = frameset(1.3 * np.sin(2 * np.pi * 4 * n / 200))
    assert pmct(fs, WindowSpec("rectangular", 200))[0] == pytest.approx(1.3**2 / 2, abs=1e-9)


def test_zero_frame_and_small_cases():
    assert pmct(frameset(np.zeros(10)), WindowSpec("hamming", 10))[0] == 0
    assert mmct(frameset([1.0, -1.0]), WindowSpec("rectangular", 2))[0] == 1


def test_window_length_mismatch():
    with pytest.raises(UsageError):
        pmct(frameset(np.zeros(10)), WindowSpec("hamming", 9))


@pytest.mark.parametrize("kind", KINDS)
def test_mmct_squared_below_pmct(kind):
    x = np.random.default_rng(3).normal(size=(40, 64))
    fs = frameset(x)
    w = WindowSpec(kind, 64)
    assert np.all(mmct(fs, w) ** 2 <= pmct(fs, w) + 1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_pmct_scale_law(kind):
    x = np.random.default_rng(4).normal(size=(10, 32))
    w = WindowSpec(kind, 32)
    np.testing.assert_allclose(pmct(frameset(2.5 * x), w), 6.25 * pmct(frameset(x), w), rtol=1e-12)


def test_detect_bounds_hand_example():
    tr = detect_bounds([0.01, 0.5, 1.0, 0.4, 0.02], np.arange(5) * 0.1)
    assert tr.threshold == pytest.approx(0.1)
    assert (tr.k_de, tr.k_fin) == (1, 3)
    assert (tr.t_de, tr.t_fin) == (pytest.approx(0.1), pytest.approx(0.3))


def test_detect_bounds_strict_and_single():
    tr = detect_bounds([0.1, 1.0, 0.1], [0, 1, 2])
    assert tr.k_de == tr.k_fin == 1


def test_detect_bounds_silent():
    with pytest.raises(SilentSignalError):
        detect_bounds([0.0, 0.0], [0, 1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 10)), min_size=1, max_size=30).filter(lambda v: max(v) > 0),
       st.floats(1e-3, 1e3))
def test_detect_bounds_scale_invariant(power, scale):
    a = detect_bounds(power, np.arange(len(power)))
    b = detect_bounds(np.asarray(power) * scale, np.arange(len(power)))
    assert (a.k_de, a.k_fin) == (b.k_de, b.k_fin)
    assert a.k_de <= a.k_fin


def test_trim_identity_and_subset():
    fs = frameset(np.arange(20.0).reshape(5, 4))
    tr = detect_bounds(np.ones(5), fs.centers)
    same = trim_silence(fs, tr)
    np.testing.assert_array_equal(same.frames, fs.frames)
    tr = detect_bounds([0.01, 0.5, 1.0, 0.4, 0.02], fs.centers)
    kept = trim_silence(fs, tr)
    np.testing.assert_array_equal(kept.frames, fs.frames[1:4])
    np.testing.assert_array_equal(kept.centers, fs.centers[1:4])
    one = trim_silence(fs, detect_bounds([0, 0, 1.0, 0, 0], fs.centers))
    assert one.n_frames == 1


@pytest.mark.parametrize("kind", KINDS)
def test_normalize(kind):
    x = np.random.default_rng(5).normal(size=(8, 30))
    w = WindowSpec(kind, 30)
    out = normalize(frameset(x), w)
    assert pmct(out, w).mean() == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(normalize(out, w).frames, out.frames, atol=1e-12)
    np.testing.assert_allclose(normalize(frameset(5 * x), w).frames, out.frames, atol=1e-12)


def test_normalize_tone_amplitude():
    n = np.arange(400)
    fs = frameset(0.3 * np.sin(2 * np.pi * 5 * n / 100).reshape(4, 100))
    out = normalize(fs, WindowSpec("rectangular", 100))
    assert np.abs(out.frames).max() == pytest.approx(np.sqrt(2), abs=1e-6)


def test_normalize_silent():
    with pytest.raises(SilentSignalError):
        normalize(frameset(np.zeros((2, 5))), WindowSpec("hamming", 5))


def test_silence_tone_silence_bounds():
    params = FrameParams(0.030, 0.25)
    fs, tr = prepare_with_bounds(padded_tone(0.5), params, "hamming")
    hop = 0.0225
    assert abs(tr.t_de - 0.3) <= hop
    assert abs(tr.t_fin - 0.7) <= hop
    w = WindowSpec("hamming", fs.frame_length)
    assert pmct(fs, w).mean() == pytest.approx(1, abs=1e-9)


def test_prepare_silent():
    with pytest.raises(SilentSignalError):
        prepare(Signal(np.zeros(8000), 8000))


@pytest.mark.parametrize("amp", [0.05, 0.3, 0.9])
def test_prepare_idempotent_on_retained_span(amp):
    params = FrameParams(0.030, 0.25)  # 240-sample frames, 180-sample hop at 8 kHz
    first = prepare(padded_tone(amp, freq=350), params)
    again = prepare(first.reconstruct(), params)
    assert again.n_frames == first.n_frames
    np.testing.assert_allclose(again.frames, first.frames, atol=1e-12)


def test_trim_never_widens():
    fs = cut_frames(padded_tone(0.4), FrameParams())
    w = WindowSpec("hamming", fs.frame_length)
    p = pmct(fs, w)
    tr = detect_bounds(p, fs.centers)
    kept = trim_silence(fs, tr)
    assert kept.n_frames <= fs.n_frames
    assert p[tr.k_de] > tr.threshold and p[tr.k_fin] > tr.threshold
