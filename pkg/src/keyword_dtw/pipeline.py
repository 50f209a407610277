"""Turning a WAV file into a prepared, featurized sound."""
from __future__ import annotations

from dataclasses import dataclass, asdict

from .energy import prepare, prepare_with_bounds
from .features import FeatureMatrix, frame_features
from .framing import FrameParams, FrameSet
from .preprocess import DEFAULT_PREEMPH_CUTOFF, pre_emphasis, resample_8k
from .signal_io import Signal, read_wav


@dataclass(frozen=True)
class Pipeline:
    """Settings shared by every sound of an experiment.

    Defaults are 30 ms frames with a quarter overlap, Hamming-weighted
    power, resampling to 8 kHz on and pre-emphasis off.
    """

    frame_duration: float = 0.030
    overlap: float = 0.25
    window: str = "hamming"
    resample: bool = True
    preemph: bool = False
    preemph_cutoff: float = DEFAULT_PREEMPH_CUTOFF
    trim_ratio: float = 0.1

    @property
    def frame_params(self) -> FrameParams:
        return FrameParams(self.frame_duration, self.overlap)

    def condition(self, signal: Signal) -> Signal:
        if self.resample:
            signal = resample_8k(signal)
        if self.preemph:
            signal = pre_emphasis(signal, self.preemph_cutoff)
        return signal

    def prepare(self, signal: Signal) -> FrameSet:
        return prepare(self.condition(signal), self.frame_params, self.window, self.trim_ratio)

    def prepare_with_bounds(self, signal: Signal):
        return prepare_with_bounds(self.condition(signal), self.frame_params, self.window, self.trim_ratio)

    def features(self, signal: Signal, descriptors) -> FeatureMatrix:
        return frame_features(self.prepare(signal), descriptors, self.window)

    def load(self, path, descriptors) -> FeatureMatrix:
        return self.features(read_wav(path), descriptors)

    def to_dict(self) -> dict:
        return asdict(self)
