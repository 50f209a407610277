"""Per-frame descriptors and per-sound summary statistics."""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .energy import WindowSpec, pmct
from .errors import DegenerateBankError, UsageError, ZeroPowerError
from .framing import FrameSet

EPS_SIGMA = 1e-12
EPS_FLOOR = 1e-12

BASIC_DESCRIPTORS = ("PMCT", "F0_ZCR", "SPC", "SPW", "SKEW", "KURT")
_FB_RE = re.compile(r"^FB\((\d+)\)$")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """K x J descriptor values, one row per frame."""

    values: np.ndarray
    descriptor_names: tuple[str, ...]
    frame_centers: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.descriptor_names):
            raise UsageError("column count must match descriptor_names")
        if not np.all(np.isfinite(values)):
            raise UsageError("descriptor values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t_center",) + tuple(self.descriptor_names))
        for t, row in zip(self.frame_centers, self.values):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


@dataclass(frozen=True, eq=False)
class SpectrumFrame:
    """One-sided power spectrum ``p[l] = |X[l]|^2`` at ``freqs[l] = l rate / N_K``."""

    power: np.ndarray
    freqs: np.ndarray

    def total(self) -> float:
        return float(self.power.sum())


@dataclass(frozen=True)
class SummaryVector:
    mean: np.ndarray
    std: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray


@dataclass(frozen=True)
class FilterBank:
    """Indicator filters partitioning the bins of a one-sided spectrum.

    ``bins[m]`` holds the bin indices owned by filter ``m``; bins are
    assigned on half-open intervals ``[f_m, f_{m+1})`` except the last,
    which is closed, and filter 0 is widened down to 0 Hz.
    """

    boundaries: np.ndarray
    scale: str
    bins: tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        return len(self.bins)


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

def dft_power(frame, rate: float) -> SpectrumFrame:
    """Power of the 1/N-normalized DFT for bins ``0..floor(N/2)``."""
    frame = np.asarray(frame, dtype=float)
    n = len(frame)
    if n == 0:
        raise UsageError("empty frame")
    spectrum = np.fft.rfft(frame) / n
    return SpectrumFrame(np.abs(spectrum) ** 2, np.arange(n // 2 + 1) * rate / n)


def _weights(sp: SpectrumFrame) -> np.ndarray:
    total = sp.total()
    if not total > 0:
        raise ZeroPowerError("spectrum carries no power")
    return sp.power / total


def spectral_mean(sp: SpectrumFrame) -> float:
    return float(_weights(sp) @ sp.freqs)


def spectral_width(sp: SpectrumFrame, mu: float) -> float:
    return float(math.sqrt(_weights(sp) @ (sp.freqs - mu) ** 2))


def spectral_skewness(sp: SpectrumFrame, mu: float, sigma: float) -> float:
    w = _weights(sp)
    if sigma < EPS_SIGMA:
        return 0.0
    return float(w @ (sp.freqs - mu) ** 3 / sigma**3)


def spectral_kurtosis(sp: SpectrumFrame, mu: float, sigma: float) -> float:
    w = _weights(sp)
    if sigma < EPS_SIGMA:
        return 0.0
    return float(w @ (sp.freqs - mu) ** 4 / sigma**4)


# --------------------------------------------------------------------------
# zero crossings
# --------------------------------------------------------------------------

def f0_zcr(fs: FrameSet, w: WindowSpec) -> np.ndarray:
    """Fundamental-frequency estimate ``rate * Z / 2`` from the windowed
    zero-crossing rate ``Z``.

    The window has the frame's length; its first ``N_K - 1`` weights apply
    to the sign changes between samples ``n`` and ``n + 1``.
    """
    if fs.frame_length < 2:
        raise UsageError("zero-crossing rate needs frames of at least 2 samples")
    if w.length != fs.frame_length:
        raise UsageError(f"window length {w.length} != frame length {fs.frame_length}")
    weights = w.weights()[:-1]
    s = np.sign(fs.frames)
    changes = 0.5 * np.abs(np.diff(s, axis=1))
    z = changes @ weights / weights.sum()
    return z * fs.rate / 2


# --------------------------------------------------------------------------
# filter banks
# --------------------------------------------------------------------------

def make_filterbank(rate: float, frame_duration: float, M: int, scale: str = "logarithmic",
                    f_min: float | None = None) -> FilterBank:
    """Build an ``M``-band indicator filter bank over ``[f_min, rate / 2]``.

    ``f_min`` defaults to ``1 / frame_duration``. Bin frequencies are those
    of a frame of ``floor(frame_duration * rate)`` samples.
    """
    if M < 1:
        raise UsageError("filter bank needs M >= 1")
    if scale not in ("linear", "logarithmic"):
        raise UsageError(f"unknown filter-bank scale {scale!r}")
    f_max = rate / 2
    if f_min is None:
        f_min = 1.0 / frame_duration
    if not 0 <= f_min < f_max:
        raise UsageError(f"need 0 <= f_min < f_max, got f_min={f_min}, f_max={f_max}")
    m = np.arange(M + 1)
    if scale == "linear":
        bounds = f_min + m * (f_max - f_min) / M
    else:
        if f_min <= 0:
            raise UsageError("logarithmic filter bank needs f_min > 0")
        bounds = f_min * (f_max / f_min) ** (m / M)
    bounds[-1] = f_max

    n_k = int(math.floor(frame_duration * rate + 1e-9))
    freqs = np.arange(n_k // 2 + 1) * rate / n_k
    # half-open bands; bins below f_min go to the first filter, f_max to the last
    owner = np.searchsorted(bounds, freqs, side="right") - 1
    owner = np.clip(owner, 0, M - 1)
    bins = tuple(np.flatnonzero(owner == i) for i in range(M))
    for i, b in enumerate(bins):
        if b.size == 0:
            raise DegenerateBankError(
                f"filter {i + 1} [{bounds[i]:.2f}, {bounds[i + 1]:.2f}) Hz contains no DFT bin", i + 1
            )
    return FilterBank(bounds, scale, bins)


def log_mag_fb_log(sp: SpectrumFrame, bank: FilterBank) -> np.ndarray:
    """Per-band mean of ``10 log10(p + eps)`` over the band's bins."""
    db = 10 * np.log10(sp.power + EPS_FLOOR)
    out = np.empty(bank.size)
    for m, b in enumerate(bank.bins):
        if b.size == 0:
            raise DegenerateBankError(f"filter {m + 1} is empty", m + 1)
        if b[-1] >= len(db):
            raise UsageError("filter bank does not match the spectrum length")
        out[m] = db[b].mean()
    return out


# --------------------------------------------------------------------------
# assembling descriptors
# --------------------------------------------------------------------------

def parse_descriptors(spec) -> list[str]:
    """Normalize a descriptor selection (list or ``"PMCT,FB(5)"``)."""
    if isinstance(spec, str):
        spec = [s for s in re.split(r",(?![^(]*\))", spec)]
    names = [s.strip().upper() for s in spec if s.strip()]
    if not names:
        raise UsageError("descriptor selection is empty")
    for name in names:
        if name not in BASIC_DESCRIPTORS and not _FB_RE.match(name):
            raise UsageError(f"unknown descriptor {name!r}")
    return names


def descriptor_columns(names: Sequence[str]) -> list[str]:
    cols = []
    for name in names:
        m = _FB_RE.match(name)
        if m:
            size = int(m.group(1))
            cols.extend(f"FB{size}_{i + 1}" for i in range(size))
        else:
            cols.append(name)
    return cols


def _spectral_moments(fs: FrameSet) -> np.ndarray:
    """Columns mean, width, skewness, kurtosis; all-zero frames give zeros."""
    out = np.zeros((fs.n_frames, 4))
    for k, frame in enumerate(fs.frames):
        sp = dft_power(frame, fs.rate)
        if not sp.total() > 0:
            continue
        mu = spectral_mean(sp)
        sigma = spectral_width(sp, mu)
        out[k] = mu, sigma, spectral_skewness(sp, mu, sigma), spectral_kurtosis(sp, mu, sigma)
    return out


def frame_features(fs: FrameSet, spec, window: str = "hamming") -> FeatureMatrix:
    """Compute the selected descriptors for every frame of ``fs``.

    ``spec`` draws from PMCT, F0_ZCR, SPC, SPW, SKEW, KURT and FB(M);
    columns follow the selection order and FB(M) expands to M columns.
    """
    names = parse_descriptors(spec)
    w = WindowSpec(window, fs.frame_length)
    moments = None
    columns = []
    for name in names:
        if name == "PMCT":
            columns.append(pmct(fs, w)[:, None])
        elif name == "F0_ZCR":
            columns.append(f0_zcr(fs, w)[:, None])
        elif name in ("SPC", "SPW", "SKEW", "KURT"):
            if moments is None:
                moments = _spectral_moments(fs)
            columns.append(moments[:, ("SPC", "SPW", "SKEW", "KURT").index(name)][:, None])
        else:
            size = int(_FB_RE.match(name).group(1))
            bank = make_filterbank(fs.rate, fs.frame_duration, size, "logarithmic")
            columns.append(np.array([log_mag_fb_log(dft_power(f, fs.rate), bank) for f in fs.frames]))
    return FeatureMatrix(np.hstack(columns), tuple(descriptor_columns(names)), fs.centers.copy())


def summarize(fm: FeatureMatrix) -> SummaryVector:
    """Per-column mean, population std, skewness and (non-excess) kurtosis."""
    z = fm.values
    if z.shape[0] < 1:
        raise UsageError("cannot summarize an empty feature matrix")
    mu = z.mean(axis=0)
    d = z - mu
    sigma = np.sqrt((d**2).mean(axis=0))
    flat = sigma < EPS_SIGMA
    safe = np.where(flat, 1.0, sigma)
    g1 = np.where(flat, 0.0, (d**3).mean(axis=0) / safe**3)
    g2 = np.where(flat, 0.0, (d**4).mean(axis=0) / safe**4)
    return SummaryVector(mu, sigma, g1, g2)
