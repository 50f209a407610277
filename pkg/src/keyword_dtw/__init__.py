"""Spoken-keyword classification with band-constrained dynamic time warping."""

from .classify import (
    ConfusionMatrix,
    DistanceSpec,
    EvaluationReport,
    confusion,
    cross_validate,
    metrics,
    predict,
    preset,
    sound_distance,
)
from .dtw import DtwConfig, WarpPath, path_cost, solve
from .energy import WindowSpec, prepare
from .features import FeatureMatrix, frame_features, summarize
from .framing import FrameParams, FrameSet, cut_frames
from .pipeline import Pipeline
from .signal_io import Signal, read_wav, scan_corpus, write_wav

__version__ = "0.1.0"
