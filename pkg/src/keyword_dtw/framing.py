"""Cutting a signal into equal-length, possibly overlapping frames."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation, NotApplicableError, TooShortError, UsageError
from .signal_io import Signal

# absorbs representation error in products such as 0.03 * 8000
_EPS = 1e-9


@dataclass(frozen=True)
class FrameParams:
    frame_duration: float = 0.030
    overlap: float = 0.25

    def __post_init__(self):
        if not self.frame_duration > 0:
            raise UsageError("frame_duration must be positive")
        if not 0 <= self.overlap < 1:
            raise UsageError("overlap must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class FrameSet:
    """K x N_K frame matrix with timing metadata.

    Attributes:
        frames: ``frames[k, n]`` is sample ``starts[k] + n`` of the source signal.
        rate: Sampling frequency in Hz.
        starts: Index of each frame's first sample in the source signal.
        centers: Mid-frame instant in seconds, ``(start + (N_K - 1) / 2) / rate``.
    """

    frames: np.ndarray
    rate: float
    starts: np.ndarray
    centers: np.ndarray

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise UsageError(f"frames must be a non-empty K x N_K matrix, got shape {self.frames.shape}")
        if len(self.starts) != self.frames.shape[0] or len(self.centers) != self.frames.shape[0]:
            raise UsageError("starts/centers length must equal the number of frames")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_length(self) -> int:
        return self.frames.shape[1]

    @property
    def frame_duration(self) -> float:
        return self.frame_length / self.rate

    def sample_times(self) -> np.ndarray:
        """``t[k, n] = (starts[k] + n) / rate``."""
        return (self.starts[:, None] + np.arange(self.frame_length)[None, :]) / self.rate

    def subset(self, first: int, last: int) -> "FrameSet":
        """Frames ``first..last`` inclusive."""
        sl = slice(first, last + 1)
        return FrameSet(self.frames[sl].copy(), self.rate, self.starts[sl].copy(), self.centers[sl].copy())

    def with_frames(self, frames: np.ndarray) -> "FrameSet":
        return replace(self, frames=frames)

    def reconstruct(self) -> Signal:
        """Signal spanning the frames, rebuilt from the frame samples."""
        first = int(self.starts[0])
        n = int(self.starts[-1]) + self.frame_length - first
        out = np.zeros(n)
        for start, frame in zip(self.starts, self.frames):
            out[start - first : start - first + self.frame_length] = frame
        return Signal(out, self.rate)


def frame_layout(n_samples: int, rate: float, params: FrameParams) -> tuple[int, np.ndarray]:
    """Frame length and start indices for a signal of ``n_samples`` samples.

    ``gamma = T_K * rate`` samples per frame; frame ``k`` starts at
    ``ceil(gamma * k * (1 - overlap))`` and holds ``floor(gamma)`` samples.
    Every frame that fits entirely in the signal is kept.
    """
    gamma = params.frame_duration * rate
    n_k = int(math.floor(gamma + _EPS))
    if n_k < 1:
        raise TooShortError(f"frame of {params.frame_duration} s holds no sample at {rate} Hz")
    if n_samples < n_k:
        raise TooShortError(f"signal of {n_samples} samples is shorter than one frame ({n_k} samples)")
    hop = gamma * (1 - params.overlap)
    # upper estimate, then drop frames that overrun the signal
    count = int(math.floor((n_samples - n_k) / hop + _EPS)) + 2
    starts = np.array([int(math.ceil(hop * k - _EPS)) for k in range(count)], dtype=int)
    starts = starts[starts + n_k <= n_samples]
    if np.any(np.diff(starts) <= 0):
        raise UsageError("frame hop shorter than one sample; lower the overlap")
    return n_k, starts


def cut_frames(signal: Signal, params: FrameParams) -> FrameSet:
    x = np.asarray(signal.samples, dtype=float)
    n_k, starts = frame_layout(len(x), signal.sample_rate, params)
    idx = starts[:, None] + np.arange(n_k)[None, :]
    centers = (starts + (n_k - 1) / 2) / signal.sample_rate
    return FrameSet(x[idx], float(signal.sample_rate), starts, centers)


def frame_overlap_check(fs: FrameSet, alpha: float | None = None) -> int:
    """Number of samples the first frame shares with the second.

    With ``alpha`` given, every consecutive pair is also checked to share
    ``alpha * N_K`` samples to within one (ceiling effects).
    """
    if fs.n_frames < 2:
        raise NotApplicableError("overlap needs at least two frames")
    shared = fs.frame_length - np.diff(fs.starts)
    if alpha is not None:
        worst = float(np.max(np.abs(shared - alpha * fs.frame_length)))
        if worst > 1 + _EPS:
            raise ContractViolation(f"frames share {shared.min()}..{shared.max()} samples, expected ~{alpha * fs.frame_length:g}")
    return int(shared[0])
