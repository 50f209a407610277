"""Rate conversion, pre-emphasis and modulation pitch shift.

Everything here acts on a raw :class:`~keyword_dtw.signal_io.Signal` before
it is cut into frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoRealRootError, UnsupportedError, UsageError
from .signal_io import Signal

TARGET_RATE = 8000.0
RESAMPLE_ORDER = 1000
DEFAULT_PREEMPH_CUTOFF = 1999.5


@dataclass(frozen=True, eq=False)
class FirFilter:
    taps: np.ndarray
    description: str = ""

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size < 1 or not np.all(np.isfinite(taps)):
            raise UsageError("FIR taps must be a non-empty finite 1-D array")
        object.__setattr__(self, "taps", taps)

    @property
    def order(self) -> int:
        return len(self.taps) - 1

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Causal filtering with zero initial state; output has the input's length."""
        x = np.asarray(x, dtype=float)
        return np.convolve(x, self.taps)[: len(x)]

    def response(self, freqs, rate: float) -> np.ndarray:
        """Complex frequency response at ``freqs`` (Hz)."""
        n = np.arange(len(self.taps))
        w = 2 * np.pi * np.atleast_1d(np.asarray(freqs, dtype=float)) / rate
        return np.exp(-1j * np.outer(w, n)) @ self.taps


def design_lowpass(cutoff: float, rate: float, taps: int = RESAMPLE_ORDER) -> FirFilter:
    """Hamming-windowed sinc low-pass of order ``taps`` (``taps + 1`` coefficients).

    The order must be even so the filter is symmetric about an integer
    centre sample; the coefficients are normalized to unit DC gain.
    """
    if not 0 < cutoff < rate / 2:
        raise UsageError(f"cutoff {cutoff} Hz outside (0, {rate / 2}) Hz")
    if taps < 8 or taps % 2:
        raise UsageError(f"filter order must be even and >= 8, got {taps}")
    n = np.arange(taps + 1) - taps / 2
    fc = cutoff / rate
    h = 2 * fc * np.sinc(2 * fc * n) * np.hamming(taps + 1)
    h /= h.sum()
    return FirFilter(h, f"lowpass {cutoff:g} Hz @ {rate:g} Hz, order {taps}")


def design_highpass(cutoff: float, rate: float, taps: int = RESAMPLE_ORDER) -> FirFilter:
    """High-pass obtained by spectral inversion of :func:`design_lowpass`."""
    lp = design_lowpass(cutoff, rate, taps)
    h = -lp.taps
    h[taps // 2] += 1.0
    return FirFilter(h, f"highpass {cutoff:g} Hz @ {rate:g} Hz, order {taps}")


def resample_8k(signal: Signal) -> Signal:
    """Down-sample to 8 kHz.

    Anti-alias low-pass at 4 kHz, then linear interpolation between the two
    input samples bracketing each output instant ``m / 8000``. The filter's
    group delay is not compensated. A signal already at 8 kHz is returned
    untouched.
    """
    rate = signal.sample_rate
    if rate < TARGET_RATE:
        raise UnsupportedError(f"cannot up-sample from {rate} Hz to {TARGET_RATE} Hz")
    if rate == TARGET_RATE:
        return signal
    lp = design_lowpass(TARGET_RATE / 2, rate, RESAMPLE_ORDER)
    filtered = lp.apply(signal.samples)
    n_in = len(filtered)
    t_end = (n_in - 1) / rate
    n_out = int(math.floor(t_end * TARGET_RATE + 1e-9)) + 1
    # position of each output instant on the input sample grid
    pos = np.arange(n_out) * (rate / TARGET_RATE)
    left = np.minimum(np.floor(pos).astype(int), n_in - 1)
    right = np.minimum(left + 1, n_in - 1)
    frac = pos - left
    out = filtered[left] * (1 - frac) + filtered[right] * frac
    return Signal(out, TARGET_RATE)


@dataclass(frozen=True)
class PreEmphasisConfig:
    """First-difference filter ``y[n] = x[n] - eta x[n-1]`` with its cutoff at ``cutoff``.

    ``eta`` is the root below 1 of ``eta^2 - 2 eta (2c + 1) + 1 = 0`` where
    ``c = cos(2 pi cutoff / rate)``; the other root is ``eta_other``.
    """

    cutoff: float
    rate: float

    def __post_init__(self):
        if not self.rate > 4 * self.cutoff:
            raise NoRealRootError(
                f"pre-emphasis needs rate > 4*cutoff (rate={self.rate}, cutoff={self.cutoff})"
            )
        if self.cutoff <= 0:
            raise UsageError("cutoff must be positive")

    @property
    def c(self) -> float:
        return math.cos(2 * math.pi * self.cutoff / self.rate)

    @property
    def eta(self) -> float:
        c = self.c
        return 2 * c + 1 - 2 * math.sqrt(c * (c + 1))

    @property
    def eta_other(self) -> float:
        c = self.c
        return 2 * c + 1 + 2 * math.sqrt(c * (c + 1))

    def power_response(self, freq: float) -> float:
        """``|H(f)|^2 = 1 + eta^2 - 2 eta cos(2 pi f / rate)``."""
        eta = self.eta
        return 1 + eta * eta - 2 * eta * math.cos(2 * math.pi * freq / self.rate)


def pre_emphasis(signal: Signal, f_c: float = DEFAULT_PREEMPH_CUTOFF) -> Signal:
    cfg = PreEmphasisConfig(f_c, signal.sample_rate)
    x = signal.samples
    y = x.copy()
    y[1:] -= cfg.eta * x[:-1]
    return Signal(y, signal.sample_rate)


def modulate_shift(
    signal: Signal,
    f_m: float,
    keep: str = "upper",
    f_s: float | None = None,
    taps: int = RESAMPLE_ORDER,
) -> Signal:
    """Shift spectral content by ``f_m`` Hz via cosine modulation.

    Modulation creates images at ``f_s + f_m`` and ``|f_s - f_m|``. One of
    them is removed by a high-pass (``keep="upper"``) or low-pass
    (``keep="lower"``) placed halfway between the images when the source
    frequency ``f_s`` is known, and at ``f_m`` otherwise.
    """
    if keep not in ("upper", "lower"):
        raise UsageError(f"keep must be 'upper' or 'lower', got {keep!r}")
    rate = signal.sample_rate
    n = np.arange(len(signal))
    mixed = signal.samples * np.cos(2 * np.pi * f_m * n / rate)
    if f_m == 0:
        return Signal(mixed, rate)
    cutoff = f_m if f_s is None else (abs(f_s - f_m) + f_s + f_m) / 2
    design = design_highpass if keep == "upper" else design_lowpass
    return Signal(design(cutoff, rate, taps).apply(mixed), rate)
