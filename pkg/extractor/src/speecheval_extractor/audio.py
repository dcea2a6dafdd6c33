"""Waveform loading, 16 kHz resampling, and speed-change time stretching."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import AudioError

SAMPLE_RATE = 16000
STRETCH_RANGE = (0.5, 2.0)

# integer PCM widths scipy may hand back
_PCM_SCALE = {np.dtype(np.int16): 2 ** 15, np.dtype(np.int32): 2 ** 31, np.dtype(np.uint8): None}


@dataclass(frozen=True)
class Waveform:
    """Mono 16 kHz audio samples, float32."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.float32)
        if arr.ndim != 1:
            raise AudioError(f"waveform must be mono 1-D, got shape {arr.shape}")
        if self.sample_rate != SAMPLE_RATE:
            raise AudioError(f"waveform must be {SAMPLE_RATE} Hz, got {self.sample_rate}")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def duration_samples(self) -> int:
        return self.samples.shape[0]


def load_wav(path) -> Waveform:
    """Read a WAV file: downmix to mono, scale PCM to [-1, 1], resample to 16 kHz."""
    try:
        rate, data = wavfile.read(path)
    except (ValueError, OSError) as e:
        raise AudioError(f"{path}: {e}") from None
    if data.ndim == 2:
        data = data.astype(np.float64).mean(axis=1)
    if data.dtype == np.uint8:
        data = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.dtype(np.int16), np.dtype(np.int32)):
        data = data.astype(np.float64) / _PCM_SCALE[data.dtype]
    else:
        data = data.astype(np.float64)
    if rate != SAMPLE_RATE:
        frac = Fraction(SAMPLE_RATE, int(rate))
        data = resample_poly(data, frac.numerator, frac.denominator)
    if data.shape[0] < 1:
        raise AudioError(f"{path}: empty waveform")
    return Waveform(samples=data.astype(np.float32))


def time_stretch(wav: Waveform, factor: float) -> Waveform:
    """Resampling-based speed change: duration becomes round(factor * T).

    The per-sample pitch shifts with the rate; factor 1.0 returns the input
    unchanged.
    """
    lo, hi = STRETCH_RANGE
    if not (lo <= factor <= hi):
        raise AudioError(f"stretch factor must be in [{lo}, {hi}], got {factor}")
    if factor == 1.0:
        return wav
    n_in = wav.duration_samples
    n_out = int(round(factor * n_in))
    positions = np.arange(n_out, dtype=np.float64) / factor
    np.clip(positions, 0.0, n_in - 1, out=positions)
    stretched = np.interp(positions, np.arange(n_in, dtype=np.float64), wav.samples)
    return Waveform(samples=stretched.astype(np.float32))
