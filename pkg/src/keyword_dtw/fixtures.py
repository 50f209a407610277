"""Synthetic warped-tone corpus used by the acceptance suite and demos.

Each class is a fixed sequence of tone segments whose loudness pattern is
what tells the classes apart. Every rendered sample gets its own tempo,
a smooth monotone time warp, a random level, silence padding and a little
additive noise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signal_io import Signal, gen_warped, write_wav

# (frequency Hz, relative amplitude, duration s)
PATTERNS = {
    "un": [(300.0, 1.0, 0.25), (300.0, 0.35, 0.25)],
    "deux": [(500.0, 0.35, 0.25), (500.0, 1.0, 0.25)],
    "trois": [(400.0, 1.0, 0.15), (400.0, 0.35, 0.2), (400.0, 1.0, 0.15)],
}

CONTROL_RATE = 200.0


@dataclass(frozen=True)
class FixtureParams:
    rate: float = 16000.0
    per_class: int = 10
    warp_sigma: float = 0.05
    warp_smooth: float = 0.25
    tempo_range: tuple[float, float] = (0.85, 1.15)
    level_range: tuple[float, float] = (0.3, 0.9)
    pad_range: tuple[float, float] = (0.1, 0.3)
    value_noise: float = 0.003


def warp_map(duration: float, sigma: float, seed: int, smooth: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    """Monotone map from pattern time to rendered time.

    Returns (pattern_times, rendered_times) sampled at ``CONTROL_RATE``.
    """
    n = int(np.ceil(duration * CONTROL_RATE)) + 1
    positions = np.arange(n) / CONTROL_RATE
    times, _ = gen_warped(Signal(positions, CONTROL_RATE), "time-noise-monotone", sigma, seed, smooth)
    return positions, times - times[0]


def render_pattern(segments, rate: float, *, tempo: float = 1.0, level: float = 1.0,
                   warp_sigma: float = 0.0, warp_seed: int = 0, warp_smooth: float = 0.25,
                   pad: tuple[float, float] = (0.0, 0.0), noise: float = 0.0,
                   noise_seed: int = 0) -> Signal:
    """Render a segment pattern as a sampled signal."""
    freqs = np.array([s[0] for s in segments])
    amps = np.array([s[1] for s in segments])
    edges = np.concatenate(([0.0], np.cumsum([s[2] * tempo for s in segments])))
    total = edges[-1]

    positions, times = warp_map(total, warp_sigma, warp_seed, warp_smooth)
    t = np.arange(int(np.floor(times[-1] * rate))) / rate
    u = np.interp(t, times, positions)
    seg = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(segments) - 1)
    phase = 2 * np.pi * np.cumsum(freqs[seg]) / rate
    body = level * amps[seg] * np.sin(phase)

    lead = np.zeros(int(pad[0] * rate))
    trail = np.zeros(int(pad[1] * rate))
    x = np.concatenate((lead, body, trail))
    if noise > 0:
        x = x + np.random.default_rng(noise_seed).normal(0.0, noise, len(x))
    return Signal(x, rate)


def generate_corpus(root, seed: int = 42, params: FixtureParams = FixtureParams()) -> dict:
    """Write ``<root>/<class>/<class>_NN.wav`` plus ``manifest.json``.

    Returns the manifest.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    manifest = {
        "seed": seed,
        "rate": params.rate,
        "per_class": params.per_class,
        "warp": {"mode": "time-noise-monotone", "sigma": params.warp_sigma, "smooth_s": params.warp_smooth},
        "value_noise_std": params.value_noise,
        "classes": {},
    }
    for name in sorted(PATTERNS):
        segments = PATTERNS[name]
        (root / name).mkdir(parents=True, exist_ok=True)
        files = []
        for i in range(params.per_class):
            tempo = rng.uniform(*params.tempo_range)
            level = rng.uniform(*params.level_range)
            pad = (rng.uniform(*params.pad_range), rng.uniform(*params.pad_range))
            warp_seed, noise_seed = (int(v) for v in rng.integers(0, 2**31, 2))
            sig = render_pattern(
                segments, params.rate, tempo=tempo, level=level,
                warp_sigma=params.warp_sigma, warp_seed=warp_seed, warp_smooth=params.warp_smooth,
                pad=pad, noise=params.value_noise, noise_seed=noise_seed,
            )
            fname = f"{name}_{i:02d}.wav"
            write_wav(sig, root / name / fname)
            files.append({"file": fname, "tempo": tempo, "level": level, "pad_s": list(pad),
                          "warp_seed": warp_seed, "duration_s": sig.duration})
        manifest["classes"][name] = {
            "segments": [{"freq_hz": f, "amplitude": a, "duration_s": d} for f, a, d in segments],
            "files": files,
        }
    with open(root / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest
