"""Audio I/O, corpus scanning and synthetic signal generators."""
from __future__ import annotations

import os
import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import AliasingError, CorpusError, FormatError, UnsupportedError, UsageError

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

WARP_MODES = ("value-noise", "both-noise", "time-noise-monotone", "time-noise-free")


@dataclass(frozen=True, eq=False)
class Signal:
    """Mono sampled signal.

    Attributes:
        samples: Real amplitudes, nominally in [-1, 1].
        sample_rate: Sampling frequency in Hz.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise UsageError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def scaled(self, factor: float) -> "Signal":
        return Signal(self.samples * factor, self.sample_rate)


@dataclass(frozen=True)
class CorpusIndex:
    """Labelled list of sound files found under a corpus root."""

    root: Path
    classes: tuple[str, ...]
    items: tuple[tuple[int, Path], ...]
    counts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.counts:
            counts = [0] * len(self.classes)
            for class_id, _ in self.items:
                counts[class_id] += 1
            object.__setattr__(self, "counts", tuple(counts))

    def __len__(self):
        return len(self.items)


# --------------------------------------------------------------------------
# WAV
# --------------------------------------------------------------------------

def _decode_samples(raw: bytes, fmt_tag: int, bits: int, channels: int) -> np.ndarray:
    if fmt_tag == WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedError(f"unsupported float width: {bits} bits")
        data = np.frombuffer(raw, dtype="<f4").astype(float)
    elif fmt_tag == WAVE_FORMAT_PCM:
        if bits == 8:
            data = (np.frombuffer(raw, dtype=np.uint8).astype(float) - 128.0) / 128.0
        elif bits == 16:
            data = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
            data = ints.astype(float) / float(1 << 23)
        else:
            raise UnsupportedError(f"unsupported PCM width: {bits} bits")
    else:
        raise UnsupportedError(f"unsupported WAV codec 0x{fmt_tag:04x}")
    n_frames = len(data) // channels
    data = data[: n_frames * channels].reshape(n_frames, channels)
    return data.mean(axis=1)


def read_wav(path) -> Signal:
    """Read a RIFF/WAVE file into a mono :class:`Signal`.

    PCM 8/16/24-bit and 32-bit float are accepted. Stereo is averaged to
    mono. Chunks other than ``fmt `` and ``data`` are skipped.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    pos = 12
    fmt = None
    data = None
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (size,) = struct.unpack("<I", blob[pos + 4 : pos + 8])
        body = blob[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise FormatError(f"{path}: chunk {chunk_id!r} truncated ({len(body)} of {size} bytes)")
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError(f"{path}: fmt chunk too small")
            fmt = struct.unpack("<HHIIHH", body[:16])
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE:
                if size < 40:
                    raise FormatError(f"{path}: extensible fmt chunk too small")
                (sub_tag,) = struct.unpack("<H", body[24:26])
                fmt = (sub_tag,) + fmt[1:]
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)

    if fmt is None or data is None:
        raise FormatError(f"{path}: missing fmt or data chunk")
    fmt_tag, channels, rate, _, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedError(f"{path}: {channels} channels not supported")
    if rate <= 0 or bits == 0 or block_align != channels * (bits // 8):
        raise FormatError(f"{path}: inconsistent fmt chunk")
    if len(data) % block_align:
        raise FormatError(f"{path}: data chunk is not a whole number of frames")
    return Signal(_decode_samples(data, fmt_tag, bits, channels), float(rate))


def write_wav(signal: Signal, path) -> None:
    """Write ``signal`` as 16-bit PCM mono, clamping to [-1, 1] first."""
    samples = np.asarray(signal.samples, dtype=float)
    if samples.size == 0:
        raise UsageError("cannot write an empty signal")
    if not np.all(np.isfinite(samples)):
        raise UsageError("samples must be finite")
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.clip(np.round(clipped * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(os.fspath(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(round(signal.sample_rate)))
        wf.writeframes(pcm.tobytes())


def scan_corpus(root) -> CorpusIndex:
    """Index ``<root>/<class_name>/*.wav``.

    Classes are the sorted subdirectory names; items are sorted by class then
    filename, so two scans of the same tree are identical.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus root {root} is not a directory")
    classes = sorted(p.name for p in root.iterdir() if p.is_dir())
    if len(classes) < 2:
        raise CorpusError(f"corpus {root} needs at least 2 class directories, found {len(classes)}")
    items = []
    for class_id, name in enumerate(classes):
        files = sorted(
            p for p in (root / name).iterdir() if p.is_file() and p.suffix.lower() == ".wav"
        )
        if not files:
            raise CorpusError(f"class {name!r} has no .wav files")
        items.extend((class_id, p) for p in files)
    return CorpusIndex(root, tuple(classes), tuple(items))


# --------------------------------------------------------------------------
# Synthetic signals
# --------------------------------------------------------------------------

def gen_tone(freq: float, duration: float, rate: float, amplitude: float = 1.0, phase: float = 0.0) -> Signal:
    """Sampled sinusoid ``amplitude * sin(2 pi freq n / rate + phase)``."""
    if not 0 < freq < rate / 2:
        raise AliasingError(f"tone at {freq} Hz cannot be represented at {rate} Hz")
    if duration <= 0:
        raise UsageError("duration must be positive")
    n = np.arange(int(np.floor(duration * rate + 1e-9)))
    return Signal(amplitude * np.sin(2 * np.pi * freq * n / rate + phase), rate)


def monotone_times(times: np.ndarray) -> np.ndarray:
    """Clamp each increment of ``times`` to be non-negative and re-accumulate."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return times.copy()
    steps = np.maximum(np.diff(times), 0.0)
    return np.concatenate(([times[0]], times[0] + np.cumsum(steps)))


def smoothed_noise(n: int, sigma: float, rate: float, smooth: float, rng) -> np.ndarray:
    """White Gaussian noise of std ``sigma`` passed through a moving average
    spanning ``smooth`` seconds."""
    width = max(1, int(round(smooth * rate)))
    white = rng.normal(0.0, sigma, n) if sigma > 0 else np.zeros(n)
    return np.convolve(white, np.full(width, 1.0 / width), mode="same")


def gen_warped(base: Signal, mode: str, noise_sigma: float, seed: int, smooth: float = 0.25):
    """Perturb a sampled signal in value and/or time.

    Modes:
        ``value-noise``: ``t = n T_e``, ``y = x + 3 B``
        ``both-noise``: ``t = [n T_e + B]+``, ``y = x + B``
        ``time-noise-monotone``: ``t = [n T_e + 3 B]+``, ``y = x``
        ``time-noise-free``: ``t = n T_e + 3 B``, ``y = x``

    ``B`` is white noise of std ``noise_sigma`` smoothed by a moving average
    over ``smooth`` seconds, and ``[.]+`` keeps only non-negative increments.

    Returns:
        (times, values) arrays of the base signal's length.
    """
    if mode not in WARP_MODES:
        raise UsageError(f"unknown warp mode {mode!r}; expected one of {WARP_MODES}")
    x = base.samples
    t = np.arange(len(x)) / base.sample_rate
    rng = np.random.default_rng(seed)
    b = smoothed_noise(len(x), noise_sigma, base.sample_rate, smooth, rng)
    if mode == "value-noise":
        return t, x + 3 * b
    if mode == "both-noise":
        return monotone_times(t + b), x + b
    if mode == "time-noise-monotone":
        return monotone_times(t + 3 * b), x.copy()
    return t + 3 * b, x.copy()


def resample_warped(times, values, rate: float, duration: float | None = None) -> Signal:
    """Evaluate an irregularly timed (monotone) sequence on a uniform grid by
    linear interpolation."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise UsageError("times must be non-decreasing")
    if duration is None:
        duration = times[-1] - times[0]
    grid = times[0] + np.arange(int(np.floor(duration * rate + 1e-9)) + 1) / rate
    return Signal(np.interp(grid, times, values), rate)


def synthesize_sequence(digits: Sequence[int], prototypes: Mapping[int, Signal], gap: float) -> Signal:
    """Concatenate one prototype per digit, separated by ``gap`` seconds of silence."""
    digits = list(digits)
    if not digits:
        raise UsageError("digit sequence is empty")
    missing = [d for d in digits if d not in prototypes]
    if missing:
        raise UsageError(f"no prototype for digit(s) {sorted(set(missing))}")
    rates = {prototypes[d].sample_rate for d in digits}
    if len(rates) != 1:
        raise UsageError(f"prototypes have mixed sample rates: {sorted(rates)}")
    (rate,) = rates
    silence = np.zeros(int(np.floor(gap * rate + 1e-9)))
    parts = []
    for i, d in enumerate(digits):
        if i:
            parts.append(silence)
        parts.append(prototypes[d].samples)
    return Signal(np.concatenate(parts), rate)
