"""Short-term power, silence trimming and power normalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SilentSignalError, UsageError
from .framing import FrameParams, FrameSet, cut_frames
from .signal_io import Signal

WINDOW_KINDS = ("rectangular", "triangular", "hamming")


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "hamming"
    length: int = 1

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise UsageError(f"unknown window {self.kind!r}; expected one of {WINDOW_KINDS}")
        if self.length < 1:
            raise UsageError("window length must be >= 1")

    def weights(self) -> np.ndarray:
        n = self.length
        if n == 1:
            return np.ones(1)
        if self.kind == "rectangular":
            return np.ones(n)
        if self.kind == "triangular":
            # positive at both ends, unlike np.bartlett
            return np.bartlett(n + 2)[1:-1]
        return np.hamming(n)

    @classmethod
    def for_frames(cls, kind: str, fs: FrameSet) -> "WindowSpec":
        return cls(kind, fs.frame_length)


@dataclass(frozen=True)
class TrimResult:
    threshold: float
    k_de: int
    k_fin: int
    t_de: float
    t_fin: float

    @property
    def kept(self) -> range:
        return range(self.k_de, self.k_fin + 1)


def _check_window(fs: FrameSet, w: WindowSpec) -> np.ndarray:
    if w.length != fs.frame_length:
        raise UsageError(f"window length {w.length} != frame length {fs.frame_length}")
    return w.weights()


def pmct(fs: FrameSet, w: WindowSpec) -> np.ndarray:
    """Windowed mean of squared samples, one value per frame."""
    weights = _check_window(fs, w)
    return (fs.frames**2) @ weights / weights.sum()


def mmct(fs: FrameSet, w: WindowSpec) -> np.ndarray:
    """Windowed mean of absolute samples, one value per frame."""
    weights = _check_window(fs, w)
    return np.abs(fs.frames) @ weights / weights.sum()


def detect_bounds(power, centers, ratio: float = 0.1) -> TrimResult:
    """First and last frames whose power strictly exceeds ``ratio * max(power)``."""
    power = np.asarray(power, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if power.size == 0:
        raise UsageError("empty power sequence")
    peak = power.max()
    if not peak > 0:
        raise SilentSignalError("signal is silent (all frame powers are zero)")
    threshold = ratio * peak
    above = np.flatnonzero(power > threshold)
    k_de, k_fin = int(above[0]), int(above[-1])
    return TrimResult(threshold, k_de, k_fin, float(centers[k_de]), float(centers[k_fin]))


def trim_silence(fs: FrameSet, tr: TrimResult) -> FrameSet:
    return fs.subset(tr.k_de, tr.k_fin)


def normalize(fs: FrameSet, w: WindowSpec) -> FrameSet:
    """Scale all samples so the mean frame power becomes 1."""
    p_mean = pmct(fs, w).mean()
    if not p_mean > 0:
        raise SilentSignalError("cannot normalize a zero-power frame set")
    return fs.with_frames(fs.frames / np.sqrt(p_mean))


def prepare(signal: Signal, params: FrameParams = FrameParams(), window: str | WindowSpec = "hamming",
            ratio: float = 0.1) -> FrameSet:
    """Frame, trim leading/trailing silence and normalize a signal."""
    fs, _ = prepare_with_bounds(signal, params, window, ratio)
    return fs


def prepare_with_bounds(signal: Signal, params: FrameParams = FrameParams(),
                        window: str | WindowSpec = "hamming", ratio: float = 0.1):
    """Like :func:`prepare` but also returns the :class:`TrimResult`."""
    fs = cut_frames(signal, params)
    kind = window.kind if isinstance(window, WindowSpec) else window
    w = WindowSpec(kind, fs.frame_length)
    tr = detect_bounds(pmct(fs, w), fs.centers, ratio)
    return normalize(trim_silence(fs, tr), w), tr
